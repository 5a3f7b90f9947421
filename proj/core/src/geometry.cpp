#include "elastfem/geometry.hpp"

#include "elastfem/error.hpp"

#include <cmath>
#include <string>

namespace elastfem {

Eigen::Vector3d CellGeometry::map(const RefPoint& p) const {
  Eigen::Vector3d x = Eigen::Vector3d::Zero();
  const int nv = kind == CellKind::Tetrahedron ? 4 : 3;
  for (int i = 0; i < nv; ++i) x += p[i] * vertices[i];
  if (kind == CellKind::Prism) x.z() = z0 + hz * p[3];
  return x;
}

CellGeometry triangle_geometry(const std::array<Eigen::Vector2d, 3>& x) {
  Eigen::Matrix2d D;
  D.col(0) = x[1] - x[0];
  D.col(1) = x[2] - x[0];
  const double det = D.determinant();
  if (!(det > 1e-14 * (D.col(0).squaredNorm() + D.col(1).squaredNorm())))
    throw Error("triangle_geometry: degenerate or negatively oriented triangle");
  CellGeometry g;
  g.kind = CellKind::Triangle;
  g.dim = 2;
  for (const auto& v : x) g.vertices.emplace_back(v.x(), v.y(), 0.0);
  const Eigen::Matrix2d Dinv = D.inverse();
  for (int c = 0; c < 2; ++c) {
    g.J(1, c) = Dinv(0, c);
    g.J(2, c) = Dinv(1, c);
    g.J(0, c) = -Dinv(0, c) - Dinv(1, c);
  }
  g.measure = 0.5 * det;
  return g;
}

CellGeometry tetrahedron_geometry(const std::array<Eigen::Vector3d, 4>& x) {
  Eigen::Matrix3d D;
  for (int i = 0; i < 3; ++i) D.col(i) = x[i + 1] - x[0];
  const double det = D.determinant();
  if (!(det > 1e-14 * std::pow(D.colwise().norm().maxCoeff(), 3)))
    throw Error("tetrahedron_geometry: degenerate or negatively oriented tetrahedron");
  CellGeometry g;
  g.kind = CellKind::Tetrahedron;
  g.dim = 3;
  g.vertices.assign(x.begin(), x.end());
  const Eigen::Matrix3d Dinv = D.inverse();
  for (int c = 0; c < 3; ++c) {
    double s = 0.0;
    for (int r = 0; r < 3; ++r) {
      g.J(r + 1, c) = Dinv(r, c);
      s += Dinv(r, c);
    }
    g.J(0, c) = -s;
  }
  g.measure = det / 6.0;
  return g;
}

CellGeometry prism_geometry(const std::array<Eigen::Vector2d, 3>& x, double z0, double hz) {
  if (!(hz > 0.0)) throw Error("prism_geometry: non-positive height");
  CellGeometry g = triangle_geometry(x);
  g.kind = CellKind::Prism;
  g.dim = 3;
  g.z0 = z0;
  g.hz = hz;
  g.J(3, 2) = 1.0 / hz;
  g.measure *= hz;
  return g;
}

int num_facets(CellKind kind) {
  switch (kind) {
    case CellKind::Interval: return 2;
    case CellKind::Triangle: return 3;
    case CellKind::Tetrahedron: return 4;
    case CellKind::Prism: return 5;
  }
  return 0;
}

RefPoint triangle_point(double l1, double l2, double l3, double xi) { return {l1, l2, l3, xi}; }

namespace {

// Gauss points along the edge opposite vertex m of a triangle, weights sum to 1.
QuadRule edge_rule(int m, int degree, double xi, bool with_xi) {
  const QuadRule g = quad_rule(CellKind::Interval, degree);
  const int a = (m + 1) % 3, b = (m + 2) % 3;
  QuadRule q;
  q.kind = CellKind::Interval;
  q.degree = g.degree;
  for (std::size_t k = 0; k < g.size(); ++k) {
    RefPoint p{};
    p[a] = 1.0 - g.points[k][0];
    p[b] = g.points[k][0];
    if (with_xi) p[3] = xi;
    q.points.push_back(p);
    q.weights.push_back(g.weights[k]);
  }
  return q;
}

}  // namespace

QuadRule facet_rule(CellKind kind, int facet, int degree) {
  if (facet < 0 || facet >= num_facets(kind)) throw Error("facet_rule: facet index out of range");
  switch (kind) {
    case CellKind::Triangle: return edge_rule(facet, degree, 0.0, false);
    case CellKind::Tetrahedron: {
      const QuadRule t = quad_rule(CellKind::Triangle, degree);
      QuadRule q;
      q.kind = CellKind::Triangle;
      q.degree = t.degree;
      int slots[3], k = 0;
      for (int s = 0; s < 4; ++s)
        if (s != facet) slots[k++] = s;
      for (std::size_t i = 0; i < t.size(); ++i) {
        RefPoint p{};
        for (int s = 0; s < 3; ++s) p[slots[s]] = t.points[i][s];
        q.points.push_back(p);
        q.weights.push_back(2.0 * t.weights[i]);
      }
      return q;
    }
    case CellKind::Prism: {
      QuadRule q;
      if (facet < 3) {
        const QuadRule e = edge_rule(facet, degree, 0.0, true);
        const QuadRule gz = quad_rule(CellKind::Interval, degree);
        q.kind = CellKind::Prism;
        q.degree = degree;
        for (std::size_t i = 0; i < e.size(); ++i) {
          for (std::size_t k = 0; k < gz.size(); ++k) {
            RefPoint p = e.points[i];
            p[3] = gz.points[k][0];
            q.points.push_back(p);
            q.weights.push_back(e.weights[i] * gz.weights[k]);
          }
        }
        return q;
      }
      const QuadRule t = quad_rule(CellKind::Triangle, degree);
      q.kind = CellKind::Triangle;
      q.degree = t.degree;
      for (std::size_t i = 0; i < t.size(); ++i) {
        RefPoint p = t.points[i];
        p[3] = facet == 3 ? 0.0 : 1.0;
        q.points.push_back(p);
        q.weights.push_back(2.0 * t.weights[i]);
      }
      return q;
    }
    case CellKind::Interval: {
      QuadRule q;
      q.kind = CellKind::Interval;
      RefPoint p{};
      p[0] = facet == 0 ? 0.0 : 1.0;
      q.points.push_back(p);
      q.weights.push_back(1.0);
      return q;
    }
  }
  throw Error("facet_rule: unknown cell kind");
}

double facet_measure(const CellGeometry& g, int facet) {
  const auto& v = g.vertices;
  switch (g.kind) {
    case CellKind::Triangle: return (v[(facet + 2) % 3] - v[(facet + 1) % 3]).norm();
    case CellKind::Tetrahedron: {
      Eigen::Vector3d p[3];
      for (int s = 0, k = 0; s < 4; ++s)
        if (s != facet) p[k++] = v[s];
      return 0.5 * (p[1] - p[0]).cross(p[2] - p[0]).norm();
    }
    case CellKind::Prism:
      if (facet < 3) return (v[(facet + 2) % 3] - v[(facet + 1) % 3]).norm() * g.hz;
      return g.measure / g.hz;
    case CellKind::Interval: return 1.0;
  }
  return 0.0;
}

Eigen::Vector3d facet_normal(const CellGeometry& g, int facet) {
  switch (g.kind) {
    case CellKind::Triangle:
    case CellKind::Tetrahedron: {
      // outward normal of the facet opposite vertex i is -grad(lambda_i)
      Eigen::Vector3d n = -g.J.row(facet).transpose();
      return n.normalized();
    }
    case CellKind::Prism: {
      if (facet == 3) return {0.0, 0.0, -1.0};
      if (facet == 4) return {0.0, 0.0, 1.0};
      Eigen::Vector3d n = -g.J.row(facet).transpose();
      n.z() = 0.0;
      return n.normalized();
    }
    case CellKind::Interval: return {facet == 0 ? -1.0 : 1.0, 0.0, 0.0};
  }
  return Eigen::Vector3d::Zero();
}

}  // namespace elastfem
