#include "elastfem/solver.hpp"

#include "elastfem/error.hpp"

#include <Eigen/CholmodSupport>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace elastfem {

namespace {

using Simplicial = Eigen::SimplicialLLT<SparseMatrix, Eigen::Lower>;

// CHOLMOD Cholesky, simplicial (no BLAS) or supernodal
class Cholmod {
 public:
  explicit Cholmod(bool supernodal = false) : supernodal_(supernodal) {}
  void compute(const SparseMatrix& m) {
    if (supernodal_)
      super_.compute(m);
    else
      simple_.compute(m);
  }
  Eigen::ComputationInfo info() const { return supernodal_ ? super_.info() : simple_.info(); }
  template <class Rhs>
  Eigen::MatrixXd solve(const Rhs& b) const {
    return supernodal_ ? Eigen::MatrixXd(super_.solve(b)) : Eigen::MatrixXd(simple_.solve(b));
  }

 private:
  bool supernodal_;
  Eigen::CholmodSimplicialLLT<SparseMatrix, Eigen::Lower> simple_;
  Eigen::CholmodSupernodalLLT<SparseMatrix, Eigen::Lower> super_;
};

void check_system(const SaddleSystem& s) {
  if (s.A.rows() != s.n_sigma || s.A.cols() != s.n_sigma || s.B.rows() != s.n_u || s.B.cols() != s.n_sigma ||
      s.M.rows() != s.n_u || s.D.rows() != s.n_sigma)
    throw Error("saddle system: inconsistent block sizes");
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(s.n_u);
  for (int k = 0; k < s.B.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(s.B, k); it; ++it) rows[it.row()] += std::abs(it.value());
  for (int i = 0; i < s.n_u; ++i)
    if (rows[i] == 0.0) throw Error("saddle system: displacement row " + std::to_string(i) + " of B is zero");
}

template <class Solver>
void factor(Solver& solver, const SparseMatrix& m, const char* what) {
  solver.compute(m);
  if (solver.info() != Eigen::Success) throw Error(std::string("factorization of ") + what + " failed");
}

}  // namespace

double block_residual(const SaddleSystem& s, const Eigen::VectorXd& sigma, const Eigen::VectorXd& u,
                      const Eigen::VectorXd& F, const Eigen::VectorXd& g) {
  const Eigen::VectorXd r1 = F - s.A * sigma - s.B.transpose() * u;
  const Eigen::VectorXd r2 = g - s.B * sigma;
  const double rhs = std::sqrt(F.squaredNorm() + g.squaredNorm());
  const double res = std::sqrt(r1.squaredNorm() + r2.squaredNorm());
  return rhs > 0.0 ? res / rhs : res;
}

SolveResult solve_saddle(const SaddleSystem& s, const Eigen::VectorXd& F, const Eigen::VectorXd& g,
                         const SolverOptions& opt) {
  check_system(s);
  if (F.size() != s.n_sigma || g.size() != s.n_u) throw Error("solve_saddle: right-hand side has the wrong size");
  if (!(opt.penalty > 0.0)) throw Error("solve_saddle: penalty must be positive");
  const double r = opt.penalty;

  Simplicial mass;
  factor(mass, s.M, "the displacement mass");
  const SparseMatrix Ar = s.A + r * s.D;
  Cholmod chol(opt.supernodal);
  factor(chol, Ar, "the augmented stress matrix");

  SolveResult out;
  out.sigma = Eigen::VectorXd::Zero(s.n_sigma);
  out.u = Eigen::VectorXd::Zero(s.n_u);

  // (ds, du) solving the block system with residual (r1, r2)
  auto correct = [&](const Eigen::VectorXd& r1, const Eigen::VectorXd& r2) {
    const Eigen::VectorXd f1 = r1 + r * (s.B.transpose() * mass.solve(r2));
    const Eigen::VectorXd b = s.B * chol.solve(f1) - r2;
    Eigen::VectorXd du = Eigen::VectorXd::Zero(s.n_u);
    Eigen::VectorXd res = b;
    Eigen::VectorXd z = mass.solve(res);
    Eigen::VectorXd p = z;
    double rz = res.dot(z);
    const double bnorm = b.norm();
    int it = 0;
    while (bnorm > 0.0 && res.norm() > opt.cg_tol * bnorm && it < opt.max_cg) {
      const Eigen::VectorXd Sp = s.B * chol.solve(Eigen::VectorXd(s.B.transpose() * p));
      const double alpha = rz / p.dot(Sp);
      du += alpha * p;
      res -= alpha * Sp;
      z = mass.solve(res);
      const double rz_new = res.dot(z);
      p = z + (rz_new / rz) * p;
      rz = rz_new;
      ++it;
    }
    out.cg_iterations += it;
    const Eigen::VectorXd ds = chol.solve(Eigen::VectorXd(f1 - s.B.transpose() * du));
    out.sigma += ds;
    out.u += du;
  };

  correct(F, g);
  out.residual = block_residual(s, out.sigma, out.u, F, g);
  while (out.residual > opt.tol && out.refinements < opt.max_refinements) {
    const Eigen::VectorXd r1 = F - s.A * out.sigma - s.B.transpose() * out.u;
    const Eigen::VectorXd r2 = g - s.B * out.sigma;
    correct(r1, r2);
    ++out.refinements;
    const double res = block_residual(s, out.sigma, out.u, F, g);
    if (!(res < out.residual)) {
      out.residual = res;
      break;
    }
    out.residual = res;
  }
  return out;
}

SolveResult solve_saddle(const SaddleSystem& s, const SolverOptions& opt) {
  return solve_saddle(s, Eigen::VectorXd::Zero(s.n_sigma), s.load, opt);
}

InfSupResult infsup_constant(const SaddleSystem& s, const InfSupOptions& opt) {
  check_system(s);
  if (s.G.rows() != s.n_sigma) throw Error("infsup_constant: the Frobenius mass was not assembled");
  Simplicial mass;
  factor(mass, s.M, "the displacement mass");
  Cholmod gram(opt.supernodal);
  const SparseMatrix G = s.G + s.D;
  factor(gram, G, "the H(div) Gram matrix");

  auto apply_K = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return s.B * gram.solve(Eigen::VectorXd(s.B.transpose() * v));
  };

  const int n = s.n_u;
  const int kmax = std::min(opt.max_iterations, n);
  std::mt19937 rng(opt.seed);
  std::normal_distribution<double> normal;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);

  Eigen::MatrixXd Q(n, kmax);    // M-orthonormal Lanczos vectors
  Eigen::MatrixXd MQ(n, kmax);   // M Q
  std::vector<double> alpha, beta;
  v /= std::sqrt(v.dot(s.M * v));

  InfSupResult res;
  for (int j = 0; j < kmax; ++j) {
    Q.col(j) = v;
    MQ.col(j) = s.M * v;
    const Eigen::VectorXd Kv = apply_K(v);
    alpha.push_back(v.dot(Kv));
    Eigen::VectorXd w = mass.solve(Kv);
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXd c = MQ.leftCols(j + 1).transpose() * w;
      w -= Q.leftCols(j + 1) * c;
    }
    const double b = std::sqrt(std::max(0.0, w.dot(s.M * w)));
    res.iterations = j + 1;

    const bool last = j + 1 == kmax || b < 1e-14 * std::abs(alpha[0]);
    if ((j + 1) % 5 == 0 || last) {
      const int m = j + 1;
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
      for (int i = 0; i < m; ++i) {
        T(i, i) = alpha[i];
        if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
      }
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
      res.lambda_min = es.eigenvalues()[0];
      res.lambda_max = es.eigenvalues()[m - 1];
      res.residual = std::abs(b * es.eigenvectors()(m - 1, 0)) / std::max(res.lambda_min, 1e-300);
      if (last || res.residual < opt.tol) break;
    }
    beta.push_back(b);
    v = w / b;
  }
  res.beta = std::sqrt(std::max(res.lambda_min, 0.0));
  return res;
}

InfSupResult infsup_constant_dense(const SaddleSystem& s) {
  check_system(s);
  if (s.G.rows() != s.n_sigma) throw Error("infsup_constant_dense: the Frobenius mass was not assembled");
  if (s.n_u > 4000) throw Error("infsup_constant_dense: system too large for a dense solve");
  Cholmod gram;
  const SparseMatrix G = s.G + s.D;
  factor(gram, G, "the H(div) Gram matrix");
  const Eigen::MatrixXd Bt = Eigen::MatrixXd(s.B.transpose());
  const Eigen::MatrixXd GiBt = gram.solve(Bt);
  const Eigen::MatrixXd K = s.B * GiBt;
  const Eigen::MatrixXd M = Eigen::MatrixXd(s.M);
  const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (K + K.transpose()), M);
  if (es.info() != Eigen::Success) throw Error("infsup_constant_dense: eigensolver failed");
  InfSupResult r;
  r.lambda_min = es.eigenvalues()[0];
  r.lambda_max = es.eigenvalues()[s.n_u - 1];
  r.beta = std::sqrt(std::max(r.lambda_min, 0.0));
  r.iterations = s.n_u;
  return r;
}

SaddleSystem restrict_stress(const SaddleSystem& s, const std::vector<char>& keep) {
  if (static_cast<int>(keep.size()) != s.n_sigma) throw Error("restrict_stress: mask has the wrong size");
  std::vector<int> map(s.n_sigma, -1);
  int n = 0;
  for (int j = 0; j < s.n_sigma; ++j)
    if (keep[j]) map[j] = n++;
  using Triplet = Eigen::Triplet<double, int>;
  std::vector<Triplet> t;
  t.reserve(n);
  for (int j = 0; j < s.n_sigma; ++j)
    if (map[j] >= 0) t.emplace_back(j, map[j], 1.0);
  SparseMatrix P(s.n_sigma, n);
  P.setFromTriplets(t.begin(), t.end());

  SaddleSystem r = s;
  r.n_sigma = n;
  r.A = P.transpose() * s.A * P;
  r.D = P.transpose() * s.D * P;
  if (s.G.rows() == s.n_sigma) r.G = P.transpose() * s.G * P;
  r.B = s.B * P;
  return r;
}

}  // namespace elastfem
