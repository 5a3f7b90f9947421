#pragma once

#include "elastfem/polynomial.hpp"

#include <vector>

namespace elastfem {

enum class CellKind { Interval, Triangle, Tetrahedron, Prism };

/// Number of reference variables a field on this kind of cell uses.
int num_vars(CellKind kind);
/// Measure of the reference cell: 1 (interval), 1/2 (triangle, prism), 1/6 (tetrahedron).
double reference_measure(CellKind kind);

/// Points are stored in the cell's reference variables (see polynomial.hpp).
struct QuadRule {
  CellKind kind = CellKind::Interval;
  std::vector<RefPoint> points;
  std::vector<double> weights;
  int degree = 0;       // exactness in the simplex variables (or xi for intervals)
  int axial_degree = 0; // exactness in xi for prisms

  std::size_t size() const { return points.size(); }
  double weight_sum() const;
};

/// Highest simplex degree for which triangle and tetrahedron rules are provided.
inline constexpr int kMaxSimplexDegree = 14;

/// Gauss-Legendre rule with n points on [0,1]; xi stored in variable slot `slot`.
QuadRule gauss_legendre(int n, int slot = 0);

/// Rule exact to the requested degree. Interval: any degree. Triangle and
/// tetrahedron: degree <= kMaxSimplexDegree. Prism: same degree in both factors.
QuadRule quad_rule(CellKind kind, int degree);

/// Tensor product of a triangle rule and a Gauss rule in xi.
QuadRule prism_rule(int degree_xy, int degree_z);

/// Closed-form integral of prod(l_i^a_i) over a simplex of the given dimension
/// (1, 2 or 3) and measure: dim! |T| prod(a_i!) / (sum a_i + dim)!.
double exact_simplex_integral(const Exponents& exponents, int dim, double measure);

/// Exact integral of a polynomial in barycentric variables over a simplex.
double exact_simplex_integral(const Polynomial& p, int dim, double measure);

}  // namespace elastfem
