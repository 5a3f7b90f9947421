#pragma once

// Affine cell geometry: reference variables -> physical coordinates.

#include "elastfem/polynomial.hpp"
#include "elastfem/quadrature.hpp"

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace elastfem {

struct CellGeometry {
  CellKind kind = CellKind::Triangle;
  int dim = 2;
  // triangle/prism: the three base vertices (z = 0); tetrahedron: four vertices
  std::vector<Eigen::Vector3d> vertices;
  double z0 = 0.0;
  double hz = 0.0;
  VarJacobian J = VarJacobian::Zero();
  double measure = 0.0;

  int num_vars() const { return elastfem::num_vars(kind); }
  Eigen::Vector3d map(const RefPoint& p) const;
  /// Physical integration weight for a reference rule point weight.
  double weight_scale() const { return measure / reference_measure(kind); }
};

/// Throws on non-positive area.
CellGeometry triangle_geometry(const std::array<Eigen::Vector2d, 3>& x);
/// Throws on non-positive volume.
CellGeometry tetrahedron_geometry(const std::array<Eigen::Vector3d, 4>& x);
CellGeometry prism_geometry(const std::array<Eigen::Vector2d, 3>& x, double z0, double hz);

/// Facets: triangle edge m and tetrahedron face i are opposite local vertex m / i.
/// Prism: 0..2 vertical faces opposite base vertex m, 3 bottom (xi = 0), 4 top (xi = 1).
int num_facets(CellKind kind);

/// Rule on a facet, in the cell's reference variables, with weights summing to 1.
QuadRule facet_rule(CellKind kind, int facet, int degree);
double facet_measure(const CellGeometry& g, int facet);
/// Unit outward normal.
Eigen::Vector3d facet_normal(const CellGeometry& g, int facet);

/// Reference point of the cell from physical barycentric/axial data.
RefPoint triangle_point(double l1, double l2, double l3, double xi = 0.0);

}  // namespace elastfem
