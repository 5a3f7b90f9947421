#include "elastfem/polynomial.hpp"

#include "elastfem/error.hpp"

#include <algorithm>
#include <cmath>

namespace elastfem {

VarJacobian cartesian_jacobian(int dim) {
  VarJacobian J = VarJacobian::Zero();
  for (int c = 0; c < dim; ++c) J(c, c) = 1.0;
  return J;
}

// ---------------------------------------------------------------- Polynomial

Polynomial Polynomial::constant(double c) {
  Polynomial p;
  if (c != 0.0) p.terms_.push_back({Exponents{}, c});
  return p;
}

Polynomial Polynomial::variable(int v, double scale) {
  Exponents e{};
  e[v] = 1;
  return monomial(e, scale);
}

Polynomial Polynomial::monomial(const Exponents& e, double c) {
  Polynomial p;
  if (c != 0.0) p.terms_.push_back({e, c});
  return p;
}

Polynomial Polynomial::affine(int v, double slope, double offset) {
  return constant(offset) + variable(v, slope);
}

void Polynomial::normalize() {
  std::sort(terms_.begin(), terms_.end(),
            [](const Term& a, const Term& b) { return a.exp < b.exp; });
  std::vector<Term> merged;
  merged.reserve(terms_.size());
  for (const auto& t : terms_) {
    if (!merged.empty() && merged.back().exp == t.exp)
      merged.back().coef += t.coef;
    else
      merged.push_back(t);
  }
  std::erase_if(merged, [](const Term& t) { return t.coef == 0.0; });
  terms_ = std::move(merged);
}

Polynomial& Polynomial::operator+=(const Polynomial& other) {
  terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
  normalize();
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& other) {
  for (const auto& t : other.terms_) terms_.push_back({t.exp, -t.coef});
  normalize();
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& t : terms_) t.coef *= s;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  Polynomial r;
  r.terms_.reserve(a.terms_.size() * b.terms_.size());
  for (const auto& ta : a.terms_) {
    for (const auto& tb : b.terms_) {
      Exponents e;
      for (int v = 0; v < kMaxVars; ++v) {
        const int s = ta.exp[v] + tb.exp[v];
        if (s > 255) throw Error("polynomial exponent overflow");
        e[v] = static_cast<std::uint8_t>(s);
      }
      r.terms_.push_back({e, ta.coef * tb.coef});
    }
  }
  r.normalize();
  return r;
}

Polynomial& Polynomial::operator*=(const Polynomial& other) {
  *this = *this * other;
  return *this;
}

Polynomial Polynomial::pow(int n) const {
  Polynomial r = constant(1.0);
  for (int i = 0; i < n; ++i) r *= *this;
  return r;
}

Polynomial Polynomial::derivative(int v) const {
  Polynomial r;
  for (const auto& t : terms_) {
    if (t.exp[v] == 0) continue;
    Term d = t;
    d.coef *= t.exp[v];
    d.exp[v] -= 1;
    r.terms_.push_back(d);
  }
  r.normalize();
  return r;
}

double Polynomial::operator()(const RefPoint& p) const {
  double sum = 0.0;
  for (const auto& t : terms_) {
    double m = t.coef;
    for (int v = 0; v < kMaxVars; ++v)
      for (int k = 0; k < t.exp[v]; ++k) m *= p[v];
    sum += m;
  }
  return sum;
}

int Polynomial::degree(int first, int count) const {
  int d = 0;
  for (const auto& t : terms_) {
    int s = 0;
    for (int v = first; v < first + count && v < kMaxVars; ++v) s += t.exp[v];
    d = std::max(d, s);
  }
  return d;
}

int Polynomial::num_vars_used() const {
  int n = 0;
  for (const auto& t : terms_)
    for (int v = 0; v < kMaxVars; ++v)
      if (t.exp[v] > 0) n = std::max(n, v + 1);
  return n;
}

double Polynomial::max_abs_coef() const {
  double m = 0.0;
  for (const auto& t : terms_) m = std::max(m, std::abs(t.coef));
  return m;
}

// ---------------------------------------------------------------- shapes

int num_components(ValueShape s) {
  switch (s) {
    case ValueShape::Scalar: return 1;
    case ValueShape::Vector2: return 2;
    case ValueShape::Vector3: return 3;
    case ValueShape::Sym2: return 3;
    case ValueShape::Sym3: return 6;
  }
  return 0;
}

int spatial_dim(ValueShape s) {
  switch (s) {
    case ValueShape::Vector2:
    case ValueShape::Sym2: return 2;
    case ValueShape::Vector3:
    case ValueShape::Sym3: return 3;
    case ValueShape::Scalar: return 0;
  }
  return 0;
}

bool is_symmetric(ValueShape s) { return s == ValueShape::Sym2 || s == ValueShape::Sym3; }
bool is_vector(ValueShape s) { return s == ValueShape::Vector2 || s == ValueShape::Vector3; }

int sym_index(int r, int c, int dim) {
  if (r > c) std::swap(r, c);
  if (r == c) return r;
  if (dim == 2) return 2;
  // (0,1) -> 3, (0,2) -> 4, (1,2) -> 5
  return r == 0 ? 2 + c : 5;
}

double frobenius_weight(int comp, int dim) { return comp < dim ? 1.0 : 2.0; }

Eigen::VectorXd sym_to_vec(const Eigen::Matrix3d& m, int dim) {
  Eigen::VectorXd v(dim == 2 ? 3 : 6);
  for (int r = 0; r < dim; ++r)
    for (int c = r; c < dim; ++c) v[sym_index(r, c, dim)] = m(r, c);
  return v;
}

Eigen::Matrix3d vec_to_sym(const Eigen::VectorXd& v, int dim) {
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) m(r, c) = v[sym_index(r, c, dim)];
  return m;
}

static ValueShape vector_shape(int dim) { return dim == 2 ? ValueShape::Vector2 : ValueShape::Vector3; }
static ValueShape sym_shape(int dim) { return dim == 2 ? ValueShape::Sym2 : ValueShape::Sym3; }

// ---------------------------------------------------------------- PolyField

PolyField::PolyField(ValueShape shape, int num_vars)
    : shape_(shape), num_vars_(num_vars), comps_(num_components(shape)) {}

PolyField::PolyField(ValueShape shape, int num_vars, std::vector<Polynomial> components)
    : shape_(shape), num_vars_(num_vars), comps_(std::move(components)) {
  if (static_cast<int>(comps_.size()) != num_components(shape))
    throw Error("PolyField: component count does not match value shape");
}

PolyField PolyField::scalar(const Polynomial& p, int num_vars) {
  return PolyField(ValueShape::Scalar, num_vars, {p});
}

PolyField PolyField::vector(const Polynomial& p, const Eigen::VectorXd& v, int num_vars) {
  const int dim = static_cast<int>(v.size());
  if (dim != 2 && dim != 3) throw Error("PolyField::vector: dimension must be 2 or 3");
  PolyField f(vector_shape(dim), num_vars);
  for (int c = 0; c < dim; ++c) f.comps_[c] = p * v[c];
  return f;
}

PolyField PolyField::sym_matrix(const Polynomial& p, const Eigen::Matrix3d& m, int dim, int num_vars) {
  PolyField f(sym_shape(dim), num_vars);
  for (int r = 0; r < dim; ++r)
    for (int c = r; c < dim; ++c) f.comps_[sym_index(r, c, dim)] = p * (0.5 * (m(r, c) + m(c, r)));
  return f;
}

Eigen::VectorXd PolyField::operator()(const RefPoint& p) const {
  Eigen::VectorXd v(size());
  for (int c = 0; c < size(); ++c) v[c] = comps_[c](p);
  return v;
}

PolyField& PolyField::operator+=(const PolyField& o) {
  if (o.shape_ != shape_) throw Error("PolyField: shape mismatch in addition");
  for (int c = 0; c < size(); ++c) comps_[c] += o.comps_[c];
  num_vars_ = std::max(num_vars_, o.num_vars_);
  return *this;
}

PolyField& PolyField::operator-=(const PolyField& o) {
  if (o.shape_ != shape_) throw Error("PolyField: shape mismatch in subtraction");
  for (int c = 0; c < size(); ++c) comps_[c] -= o.comps_[c];
  num_vars_ = std::max(num_vars_, o.num_vars_);
  return *this;
}

PolyField& PolyField::operator*=(double s) {
  for (auto& c : comps_) c *= s;
  return *this;
}

PolyField& PolyField::operator*=(const Polynomial& p) {
  for (auto& c : comps_) c *= p;
  return *this;
}

int PolyField::degree(int first, int count) const {
  int d = 0;
  for (const auto& c : comps_) d = std::max(d, c.degree(first, count));
  return d;
}

Eigen::VectorXd eval(const PolyField& f, int cell_vars, const RefPoint& p) {
  if (f.num_vars() != cell_vars)
    throw Error("eval: field variables (" + std::to_string(f.num_vars()) +
                ") do not match the cell (" + std::to_string(cell_vars) + ")");
  return f(p);
}

// ---------------------------------------------------------------- calculus

static Polynomial physical_partial(const Polynomial& p, const VarJacobian& J, int c) {
  Polynomial r;
  for (int v = 0; v < kMaxVars; ++v)
    if (J(v, c) != 0.0) r += p.derivative(v) * J(v, c);
  return r;
}

PolyField gradient(const Polynomial& p, const VarJacobian& J, int dim, int num_vars) {
  PolyField g(vector_shape(dim), num_vars);
  for (int c = 0; c < dim; ++c) g[c] = physical_partial(p, J, c);
  return g;
}

PolyField divergence(const PolyField& f, const VarJacobian& J) {
  const int dim = spatial_dim(f.shape());
  if (is_symmetric(f.shape())) {
    PolyField d(vector_shape(dim), f.num_vars());
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) d[r] += physical_partial(f[sym_index(r, c, dim)], J, c);
    return d;
  }
  if (is_vector(f.shape())) {
    Polynomial s;
    for (int c = 0; c < dim; ++c) s += physical_partial(f[c], J, c);
    return PolyField::scalar(s, f.num_vars());
  }
  throw Error("divergence: field must be vector or symmetric-matrix valued");
}

PolyField sym_gradient(const PolyField& v, const VarJacobian& J) {
  if (!is_vector(v.shape())) throw Error("sym_gradient: field must be vector valued");
  const int dim = spatial_dim(v.shape());
  PolyField e(sym_shape(dim), v.num_vars());
  for (int r = 0; r < dim; ++r)
    for (int c = r; c < dim; ++c)
      e[sym_index(r, c, dim)] = (physical_partial(v[r], J, c) + physical_partial(v[c], J, r)) * 0.5;
  return e;
}

PolyField curl2d(const Polynomial& p, const VarJacobian& J, int num_vars) {
  PolyField g(ValueShape::Vector2, num_vars);
  g[0] = physical_partial(p, J, 1);
  g[1] = physical_partial(p, J, 0) * -1.0;
  return g;
}

// ---------------------------------------------------------------- tabulation

Eigen::MatrixXd tabulate(const std::vector<PolyField>& fields, const std::vector<RefPoint>& points) {
  if (fields.empty()) return Eigen::MatrixXd(0, 0);
  const int nc = fields.front().size();
  int max_exp = 0;
  for (const auto& f : fields) {
    if (f.size() != nc) throw Error("tabulate: fields must share a value shape");
    for (const auto& p : f.components())
      for (const auto& t : p.terms())
        for (int v = 0; v < kMaxVars; ++v) max_exp = std::max(max_exp, static_cast<int>(t.exp[v]));
  }
  const int np = static_cast<int>(points.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(np) * nc, fields.size());
  std::vector<double> pw(static_cast<std::size_t>(kMaxVars) * (max_exp + 1));
  for (int q = 0; q < np; ++q) {
    for (int v = 0; v < kMaxVars; ++v) {
      double* row = &pw[static_cast<std::size_t>(v) * (max_exp + 1)];
      row[0] = 1.0;
      for (int k = 1; k <= max_exp; ++k) row[k] = row[k - 1] * points[q][v];
    }
    for (std::size_t j = 0; j < fields.size(); ++j) {
      for (int c = 0; c < nc; ++c) {
        double s = 0.0;
        for (const auto& t : fields[j][c].terms()) {
          double m = t.coef;
          for (int v = 0; v < kMaxVars; ++v)
            if (t.exp[v]) m *= pw[static_cast<std::size_t>(v) * (max_exp + 1) + t.exp[v]];
          s += m;
        }
        out(static_cast<Eigen::Index>(q) * nc + c, static_cast<Eigen::Index>(j)) = s;
      }
    }
  }
  return out;
}

}  // namespace elastfem
