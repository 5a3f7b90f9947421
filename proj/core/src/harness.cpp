#include "elastfem/harness.hpp"

#include "elastfem/error.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

namespace elastfem {

namespace {

RefPoint cart(const Eigen::Vector3d& x) { return {x.x(), x.y(), x.z(), 0.0}; }

}  // namespace

Eigen::VectorXd ManufacturedCase::u_at(const Eigen::Vector3d& x) const { return u(cart(x)); }
Eigen::VectorXd ManufacturedCase::sigma_at(const Eigen::Vector3d& x) const { return sigma(cart(x)); }
Eigen::VectorXd ManufacturedCase::f_at(const Eigen::Vector3d& x) const { return f(cart(x)); }

VectorFunction ManufacturedCase::load() const {
  const PolyField ff = f;
  return [ff](const Eigen::Vector3d& x) { return Eigen::VectorXd(ff(cart(x))); };
}

ManufacturedCase manufactured_case(int dim, const Material& material) {
  if (dim != 2 && dim != 3) throw Error("manufactured_case: dimension must be 2 or 3");
  ManufacturedCase mc;
  mc.dim = dim;
  mc.material = material;
  const Polynomial one = Polynomial::constant(1.0);
  Polynomial q = one;
  for (int v = 0; v < dim; ++v) {
    const Polynomial x = Polynomial::variable(v);
    q *= x * (one - x);
  }
  std::vector<Polynomial> comps;
  for (int c = 0; c < dim; ++c) comps.push_back(q * std::pow(2.0, 4 + c));
  mc.u = PolyField(dim == 3 ? ValueShape::Vector3 : ValueShape::Vector2, 3, comps);

  const VarJacobian J = cartesian_jacobian(dim);
  const PolyField eps = sym_gradient(mc.u, J);
  Polynomial tr;
  for (int c = 0; c < dim; ++c) tr += eps[c];
  mc.sigma = eps * (2.0 * material.mu);
  for (int c = 0; c < dim; ++c) mc.sigma[c] += tr * material.lambda;
  mc.f = divergence(mc.sigma, J);
  return mc;
}

int level_to_n(int level) {
  if (level < 1 || level > 12) throw Error("level must lie in [1, 12]");
  return 1 << (level - 1);
}

ErrorNorms error_norms(const Discretization& disc, const Eigen::VectorXd& sigma_h, const Eigen::VectorXd& u_h,
                       const ManufacturedCase& mc, int degree) {
  if (mc.dim != disc.dim()) throw Error("error_norms: manufactured case has the wrong dimension");
  if (u_h.size() != disc.dofs().n_u) throw Error("error_norms: displacement vector has the wrong size");
  const int dim = disc.dim(), ncs = dim == 3 ? 6 : 3;
  const QuadRule rule = accurate_rule(disc.kind(), degree);
  double es = 0.0, eu = 0.0, ed = 0.0;
  for (std::size_t cell = 0; cell < disc.num_cells(); ++cell) {
    const ElementBasis b = disc.element(cell);
    std::vector<PolyField> divs;
    for (const auto& s : b.stress) divs.push_back(divergence(s, b.geometry.J));
    const Eigen::VectorXd ls = disc.local_sigma(cell, sigma_h);
    const Eigen::VectorXd lu = u_h.segment(disc.dofs().u_offset(cell), disc.dofs().local_u);
    const Eigen::VectorXd sh = tabulate(b.stress, rule.points) * ls;
    const Eigen::VectorXd dh = tabulate(divs, rule.points) * ls;
    const Eigen::VectorXd uh = tabulate(b.disp, rule.points) * lu;
    const double scale = b.geometry.weight_scale();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Eigen::Vector3d x = b.geometry.map(rule.points[q]);
      const double w = rule.weights[q] * scale;
      const Eigen::VectorXd s = mc.sigma_at(x) - sh.segment(q * ncs, ncs);
      for (int c = 0; c < ncs; ++c) es += w * frobenius_weight(c, dim) * s[c] * s[c];
      eu += w * (mc.u_at(x) - uh.segment(q * dim, dim)).squaredNorm();
      ed += w * (mc.f_at(x) - dh.segment(q * dim, dim)).squaredNorm();
    }
  }
  return {std::sqrt(es), std::sqrt(eu), std::sqrt(ed)};
}

void fill_orders(std::vector<ConvergenceRow>& rows) {
  auto order = [](double prev, double cur) { return prev > 0.0 && cur > 0.0 ? std::log2(prev / cur) : 0.0; };
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i == 0) {
      rows[i].order_sigma = rows[i].order_u = rows[i].order_div = 0.0;
      continue;
    }
    rows[i].order_sigma = order(rows[i - 1].err_sigma, rows[i].err_sigma);
    rows[i].order_u = order(rows[i - 1].err_u, rows[i].err_u);
    rows[i].order_div = order(rows[i - 1].err_div, rows[i].err_div);
  }
}

std::vector<ConvergenceRow> convergence_study(ElementKind kind, int levels, const ConvergenceOptions& opt) {
  if (levels < 1 || levels > kMaxLevels)
    throw Error("convergence_study: levels must lie in [1, " + std::to_string(kMaxLevels) + "]");
  const int dim = kind == ElementKind::TriNC ? 2 : 3;
  const ManufacturedCase mc = manufactured_case(dim);
  const VectorFunction f = mc.load();
  std::vector<ConvergenceRow> rows;
  for (int level = 1; level <= levels; ++level) {
    const auto t0 = std::chrono::steady_clock::now();
    const Discretization disc = Discretization::make(kind, level_to_n(level));
    const SaddleSystem sys = assemble(disc, mc.material, f, opt.assembly);
    if (!opt.dump_prefix.empty()) dump_system(sys, opt.dump_prefix + "_L" + std::to_string(level));
    const SolveResult sol = solve_saddle(sys, opt.solver);

    ConvergenceRow row;
    row.level = level;
    row.h = 1.0 / disc.n();
    row.n_sigma = sys.n_sigma;
    row.n_u = sys.n_u;
    row.residual = sol.residual;
    row.cg_iterations = sol.cg_iterations;
    const double aa = sol.sigma.dot(sys.A * sol.sigma);
    row.energy_defect = std::abs(aa + sys.load.dot(sol.u)) / std::abs(aa);
    if (!(sol.residual <= opt.solver.tol)) {
      row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (opt.progress) opt.progress(row);
      break;
    }
    const ErrorNorms e = error_norms(disc, sol.sigma, sol.u, mc, opt.error_degree);
    row.err_sigma = e.sigma;
    row.err_u = e.u;
    row.err_div = e.div;
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rows.push_back(row);
    fill_orders(rows);
    if (opt.progress) opt.progress(rows.back());
  }
  return rows;
}

std::string convergence_csv_header() { return "level,h,err_sigma_l2,order_sigma,err_u_l2,order_u,err_div_l2,order_div"; }

std::string convergence_csv_line(const ConvergenceRow& r) {
  auto ord = [](double o) {
    char b[32];
    if (o == 0.0) return std::string("0.0");
    std::snprintf(b, sizeof b, "%.2f", o);
    return std::string(b);
  };
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d,%.8f,%.8f,%s,%.8f,%s,%.8f,%s", r.level, r.h, r.err_sigma,
                ord(r.order_sigma).c_str(), r.err_u, ord(r.order_u).c_str(), r.err_div, ord(r.order_div).c_str());
  return buf;
}

std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
  std::string out = convergence_csv_header() + "\n";
  for (const auto& r : rows) out += convergence_csv_line(r) + "\n";
  return out;
}

double curl_bubble_moment(const std::array<Eigen::Vector2d, 3>& x) {
  const CellGeometry g = triangle_geometry(x);
  const Polynomial b = Polynomial::variable(0) * Polynomial::variable(1) * Polynomial::variable(2);
  const PolyField c = curl2d(b, g.J, 3);
  const auto X = coordinate_polys(g);
  return exact_simplex_integral(c[0] * X[1] - c[1] * X[0], 2, g.measure);
}

bool Certificate::pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return !checks.empty();
}

std::string Certificate::to_text() const {
  std::ostringstream out;
  out << "element " << to_string(kind) << "\n";
  for (const auto& c : checks) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%-10.4g bound %-10.4g", c.value, c.bound);
    out << (c.pass ? "  PASS  " : "  FAIL  ") << c.name << "  " << buf;
    if (!c.detail.empty()) out << "  " << c.detail;
    out << "\n";
  }
  out << (pass() ? "PASS" : "FAIL") << "\n";
  return out.str();
}

Eigen::VectorXd random_sigma(const Discretization& disc, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Eigen::VectorXd x(disc.dofs().n_sigma);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = U(rng);
  return x;
}

Certificate verify_element(ElementKind kind, double tol) {
  Certificate cert;
  cert.kind = kind;
  auto add = [&](std::string name, double value, double bound, bool pass, std::string detail = {}) {
    cert.checks.push_back({std::move(name), value, bound, pass, std::move(detail)});
  };
  auto exact = [&](const std::string& name, int value, int target) {
    add(name, value, target, value == target);
  };

  ElementBasis basis;
  int ns = 0, nu = 0;
  switch (kind) {
    case ElementKind::Prism:
      basis = prism_element(reference_prism_cell());
      ns = kPrismStress;
      nu = kPrismDisp;
      break;
    case ElementKind::TetNC:
      basis = tet_nc_element(reference_tet_cell());
      ns = kTetStress;
      nu = kTetDisp;
      break;
    case ElementKind::TriNC:
      basis = tri_nc_element(reference_triangle_cell());
      ns = kTriStress;
      nu = kTriDisp;
      break;
  }
  exact("stress fields", basis.n_stress(), ns);
  exact("displacement fields", basis.n_disp(), nu);

  const UnisolvenceReport u = unisolvence(kind);
  exact("dof functionals", u.rows, ns);
  add("unisolvence sigma_min", u.sigma_min, 1e-8, u.sigma_min > 1e-8,
      "condition " + std::to_string(u.condition));

  auto rank_checks = [&](const std::string& name, BubbleSpace space) {
    const RankReport r = bubble_divergence_rank(space);
    add(name + " bubble divergence rank", r.rank, r.target, r.rank == r.target,
        std::to_string(r.num_bubbles) + " bubbles");
    add(name + " rigid motion content", r.rm_projection, 1e-12, r.rm_projection <= 1e-12);
    add(name + " divergence expansion residual", r.expansion_residual, tol, r.expansion_residual <= tol);
  };
  const double incl = divergence_inclusion_residual(basis);
  add("div stress in displacement space", incl, tol, incl <= tol);

  switch (kind) {
    case ElementKind::Prism: {
      rank_checks("prism", BubbleSpace::Prism);
      rank_checks("2D symmetric", BubbleSpace::Triangle2D);
      const std::array<Eigen::Vector2d, 3> x = reference_triangle_cell().x;
      const double area = triangle_geometry(x).measure;
      const double m = curl_bubble_moment(x);
      const double dev = std::abs(m + area / 30.0) / (area / 30.0);
      add("curl bubble moment + |T|/30", dev, 1e-12, dev <= 1e-12);
      const Discretization d = Discretization::make(kind, 2);
      const JumpReport j = interface_jumps(d, random_sigma(d));
      add("normal trace jump (n=2)", j.max_pointwise, tol, j.max_pointwise <= tol,
          std::to_string(j.interfaces) + " faces");
      break;
    }
    case ElementKind::TetNC:
    case ElementKind::TriNC: {
      const int dim = kind == ElementKind::TetNC ? 3 : 2;
      rank_checks(kind == ElementKind::TetNC ? "tet" : "tri",
                  kind == ElementKind::TetNC ? BubbleSpace::TetNC : BubbleSpace::TriNC);
      const std::vector<int> pr = pair_space_ranks(dim);
      const int target = dim == 3 ? 7 : 5;
      int worst = target;
      for (int r : pr)
        if (r != target) worst = r;
      exact("pair space rank", worst, target);
      const Discretization d = Discretization::make(kind, 2);
      const JumpReport j = interface_jumps(d, random_sigma(d));
      add("facet moment jump (n=2)", j.max_moment, tol, j.max_moment <= tol,
          std::to_string(j.interfaces) + " facets");
      add("pointwise jump witness (n=2)", j.max_pointwise, 1e-3, j.max_pointwise >= 1e-3);
      break;
    }
  }
  return cert;
}

}  // namespace elastfem
