#include "elastfem/quadrature.hpp"

#include "elastfem/error.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace elastfem {

int num_vars(CellKind kind) {
  switch (kind) {
    case CellKind::Interval: return 1;
    case CellKind::Triangle: return 3;
    case CellKind::Tetrahedron: return 4;
    case CellKind::Prism: return 4;
  }
  return 0;
}

double reference_measure(CellKind kind) {
  switch (kind) {
    case CellKind::Interval: return 1.0;
    case CellKind::Triangle: return 0.5;
    case CellKind::Tetrahedron: return 1.0 / 6.0;
    case CellKind::Prism: return 0.5;
  }
  return 0.0;
}

double QuadRule::weight_sum() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

namespace {

// Nodes and weights on [-1, 1] by Newton iteration on P_n.
void legendre_nodes(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= n; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = n * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // final derivative at the converged node
    double p0 = 1.0, p1 = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
    }
    dp = n * (z * p0 - p1) / (z * z - 1.0);
    x[i] = -z;
    x[n - 1 - i] = z;
    w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

struct Rule1D {
  std::vector<double> x, w;  // on [0,1]
};

Rule1D gauss01(int n) {
  Rule1D r;
  legendre_nodes(n, r.x, r.w);
  for (int i = 0; i < n; ++i) {
    r.x[i] = 0.5 * (r.x[i] + 1.0);
    r.w[i] *= 0.5;
  }
  return r;
}

int points_for_degree(int degree) { return std::max(1, (degree + 2) / 2); }

QuadRule triangle_rule(int degree) {
  const Rule1D gu = gauss01(points_for_degree(degree + 1));
  const Rule1D gv = gauss01(points_for_degree(degree));
  QuadRule q;
  q.kind = CellKind::Triangle;
  q.degree = degree;
  for (std::size_t i = 0; i < gu.x.size(); ++i) {
    for (std::size_t j = 0; j < gv.x.size(); ++j) {
      const double s = gu.x[i];
      const double t = gv.x[j] * (1.0 - s);
      q.points.push_back({1.0 - s - t, s, t, 0.0});
      q.weights.push_back(gu.w[i] * gv.w[j] * (1.0 - s));
    }
  }
  return q;
}

QuadRule tetrahedron_rule(int degree) {
  const Rule1D gu = gauss01(points_for_degree(degree + 2));
  const Rule1D gv = gauss01(points_for_degree(degree + 1));
  const Rule1D gw = gauss01(points_for_degree(degree));
  QuadRule q;
  q.kind = CellKind::Tetrahedron;
  q.degree = degree;
  for (std::size_t i = 0; i < gu.x.size(); ++i) {
    for (std::size_t j = 0; j < gv.x.size(); ++j) {
      for (std::size_t k = 0; k < gw.x.size(); ++k) {
        const double s = gu.x[i];
        const double t = gv.x[j] * (1.0 - s);
        const double r = gw.x[k] * (1.0 - s) * (1.0 - gv.x[j]);
        q.points.push_back({1.0 - s - t - r, s, t, r});
        q.weights.push_back(gu.w[i] * gv.w[j] * gw.w[k] * (1.0 - s) * (1.0 - s) * (1.0 - gv.x[j]));
      }
    }
  }
  return q;
}

void check_simplex_degree(int degree) {
  if (degree < 0 || degree > kMaxSimplexDegree)
    throw Error("quad_rule: simplex degree " + std::to_string(degree) + " unsupported (0.." +
                std::to_string(kMaxSimplexDegree) + ")");
}

}  // namespace

QuadRule gauss_legendre(int n, int slot) {
  if (n < 1) throw Error("gauss_legendre: need at least one point");
  const Rule1D g = gauss01(n);
  QuadRule q;
  q.kind = CellKind::Interval;
  q.degree = 2 * n - 1;
  for (int i = 0; i < n; ++i) {
    RefPoint p{};
    p[slot] = g.x[i];
    q.points.push_back(p);
    q.weights.push_back(g.w[i]);
  }
  return q;
}

QuadRule prism_rule(int degree_xy, int degree_z) {
  check_simplex_degree(degree_xy);
  if (degree_z < 0) throw Error("prism_rule: negative axial degree");
  const QuadRule tri = triangle_rule(degree_xy);
  const Rule1D gz = gauss01(points_for_degree(degree_z));
  QuadRule q;
  q.kind = CellKind::Prism;
  q.degree = degree_xy;
  q.axial_degree = 2 * static_cast<int>(gz.x.size()) - 1;
  for (std::size_t i = 0; i < tri.size(); ++i) {
    for (std::size_t k = 0; k < gz.x.size(); ++k) {
      RefPoint p = tri.points[i];
      p[3] = gz.x[k];
      q.points.push_back(p);
      q.weights.push_back(tri.weights[i] * gz.w[k]);
    }
  }
  return q;
}

QuadRule quad_rule(CellKind kind, int degree) {
  switch (kind) {
    case CellKind::Interval:
      if (degree < 0) throw Error("quad_rule: negative degree");
      return gauss_legendre(points_for_degree(degree));
    case CellKind::Triangle: check_simplex_degree(degree); return triangle_rule(degree);
    case CellKind::Tetrahedron: check_simplex_degree(degree); return tetrahedron_rule(degree);
    case CellKind::Prism: return prism_rule(degree, degree);
  }
  throw Error("quad_rule: unknown cell kind");
}

double exact_simplex_integral(const Exponents& e, int dim, double measure) {
  auto factorial = [](int n) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
  };
  double num = factorial(dim);
  int total = 0;
  for (int v = 0; v <= dim; ++v) {
    num *= factorial(e[v]);
    total += e[v];
  }
  return measure * num / factorial(total + dim);
}

double exact_simplex_integral(const Polynomial& p, int dim, double measure) {
  double s = 0.0;
  for (const auto& t : p.terms()) s += t.coef * exact_simplex_integral(t.exp, dim, measure);
  return s;
}

}  // namespace elastfem
