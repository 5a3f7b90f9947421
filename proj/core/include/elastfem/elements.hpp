#pragma once

// Local shape bases and degree-of-freedom functionals of the three lowest
// order mixed elasticity elements:
//   prism   conforming, 108 stress + 33 displacement fields
//   tet     nonconforming, 42 + 12
//   tri     nonconforming, 15 + 6

#include "elastfem/geometry.hpp"
#include "elastfem/mesh.hpp"
#include "elastfem/polynomial.hpp"

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

namespace elastfem {

enum class ElementKind { Prism, TetNC, TriNC };

ElementKind parse_element_kind(const std::string& name);
std::string to_string(ElementKind kind);

enum class EntityKind { Vertex, Edge, Face, Interior };

struct ShapeTag {
  EntityKind entity = EntityKind::Interior;
  int entity_id = 0;  // local vertex/edge/face index
  int component = 0;
};

/// A triangle together with the global orientation of its edges.
/// Local edge m is opposite local vertex m.
struct TriangleCell {
  std::array<Eigen::Vector2d, 3> x;
  std::array<std::array<int, 2>, 3> edge_ends{};  // local vertices of edge m, globally lower first
  std::array<Eigen::Vector2d, 3> edge_t;          // global unit tangent
  std::array<Eigen::Vector2d, 3> edge_nu;         // global unit normal
  std::array<int, 3> edge_sign{};                 // outward normal . global normal
  std::array<Eigen::Matrix2d, 3> edge_frame;      // columns n_1, n_2
};

/// A tetrahedron with the global orientation of its faces.
/// Local face i is opposite local vertex i.
struct TetCell {
  std::array<Eigen::Vector3d, 4> x;
  std::array<std::array<int, 3>, 4> face_verts{};  // local vertices of face i in global order
  std::array<Eigen::Vector3d, 4> face_nu;          // global unit normal
  std::array<Eigen::Matrix3d, 4> face_frame;       // columns n_1, n_2, n_3
};

struct PrismCell {
  TriangleCell base;
  double z0 = 0.0;
  double hz = 1.0;
};

TriangleCell triangle_cell(const TriMesh2D& mesh, std::size_t t);
/// Standalone triangle: local order is the global order, frames from its own tangents.
TriangleCell triangle_cell(const std::array<Eigen::Vector2d, 3>& x);
TetCell tet_cell(const TetMesh& mesh, std::size_t t);
TetCell tet_cell(const std::array<Eigen::Vector3d, 4>& x);
PrismCell prism_cell(const PrismMesh& mesh, std::size_t cell);
PrismCell prism_cell(const std::array<Eigen::Vector2d, 3>& x, double z0, double hz);

CellGeometry geometry(const TriangleCell& c);
CellGeometry geometry(const TetCell& c);
CellGeometry geometry(const PrismCell& c);

struct ElementBasis {
  ElementKind kind = ElementKind::Prism;
  CellGeometry geometry;
  std::vector<PolyField> stress;
  std::vector<ShapeTag> stress_tags;
  std::vector<PolyField> disp;

  int n_stress() const { return static_cast<int>(stress.size()); }
  int n_disp() const { return static_cast<int>(disp.size()); }
};

// ---------------------------------------------------------------- 2D building blocks

/// 30 fields of the P3 symmetric-stress element: 9 vertex, 12 edge, 9 bubble.
/// Fields use `num_vars` reference variables (3 on a triangle, 4 inside a prism).
std::vector<PolyField> hz2d_basis(const TriangleCell& cell, int num_vars = 3,
                                  std::vector<ShapeTag>* tags = nullptr);
/// 12 fields of BDM2: 9 edge (flux against the outward normal), 3 bubble.
std::vector<PolyField> bdm2_basis(const TriangleCell& cell, int num_vars = 3,
                                  std::vector<ShapeTag>* tags = nullptr);

// ---------------------------------------------------------------- prism

/// Field counts of the three stress blocks.
inline constexpr int kPrismTau1 = 60, kPrismTau2 = 36, kPrismTau3 = 12;
inline constexpr int kPrismStress = 108, kPrismDisp = 33;

/// Axial factors on [0, 1].
std::array<Polynomial, 2> prism_tau1_axial();  // xi, 1 - xi
std::array<Polynomial, 3> prism_tau2_axial();  // top node, bottom node, interior
std::array<Polynomial, 4> prism_tau3_axial();  // top node, bottom node, two interior

std::vector<PolyField> prism_stress_basis(const PrismCell& cell, std::vector<ShapeTag>* tags = nullptr);
std::vector<PolyField> prism_disp_basis();
ElementBasis prism_element(const PrismCell& cell);

// ---------------------------------------------------------------- nonconforming

/// phi_{i,j}^{(a)} on the face (tet) or edge (tri) opposite vertex i; j, a vertices of that facet.
Polynomial tet_phi(int i, int j, int a);
Polynomial tri_phi(int i, int j, int a);

inline constexpr int kTetStress = 42, kTetDisp = 12;
inline constexpr int kTriStress = 15, kTriDisp = 6;

/// 36 face fields (9 per face, index 9 i + 3 c + r for frame vector n_c and the
/// r-th face vertex in global order) followed by 6 bubbles.
std::vector<PolyField> tet_nc_basis(const TetCell& cell, std::vector<ShapeTag>* tags = nullptr);
/// Raw fields phi t t^T of face i, ordered (j, a) over the face vertices in global order.
std::vector<PolyField> tet_face_phi_fields(const TetCell& cell, int face);
/// 12 edge fields (index 4 m + 2 c + r) followed by 3 bubbles.
std::vector<PolyField> tri_nc_basis(const TriangleCell& cell, std::vector<ShapeTag>* tags = nullptr);
std::vector<PolyField> tri_face_phi_fields(const TriangleCell& cell, int edge);

/// Face/edge moment matrix H_{lm} = int_F q_l . (Phi_m nu_global).
Eigen::MatrixXd tet_face_moment_matrix(const TetCell& cell, int face, const std::vector<PolyField>& fields);
Eigen::MatrixXd tri_edge_moment_matrix(const TriangleCell& cell, int edge, const std::vector<PolyField>& fields);

/// Full P1 vector fields lambda_a e_c, index 3 a + c (tet) or 2 a + c (tri).
std::vector<PolyField> p1_disp_basis(int dim);
ElementBasis tet_nc_element(const TetCell& cell);
ElementBasis tri_nc_element(const TriangleCell& cell);

/// Rigid motions written in the cell's reference variables (6 in 3D, 3 in 2D).
std::vector<PolyField> rigid_motions(const CellGeometry& g);
/// Physical coordinates as polynomials in the cell's reference variables.
std::array<Polynomial, 3> coordinate_polys(const CellGeometry& g);

// ---------------------------------------------------------------- degrees of freedom

/// F(tau) = sum_k coeffs.col(k) . tau(points[k]).
struct DofFunctional {
  int item = 0;  // item number in the element's DOF list
  EntityKind entity = EntityKind::Interior;
  int entity_id = 0;
  int index = 0;
  std::vector<RefPoint> points;
  Eigen::MatrixXd coeffs;  // components x points
};

std::vector<DofFunctional> prism_dof_functionals(const PrismCell& cell);
std::vector<DofFunctional> tet_nc_dof_functionals(const TetCell& cell);
std::vector<DofFunctional> tri_nc_dof_functionals(const TriangleCell& cell);

/// D_{ij} = F_i(field_j).
Eigen::MatrixXd dof_matrix(const std::vector<DofFunctional>& dofs, const std::vector<PolyField>& fields);

// ---------------------------------------------------------------- certificates

struct UnisolvenceReport {
  int rows = 0;
  int cols = 0;
  double sigma_min = 0.0;  // after unit row/column scaling
  double sigma_max = 0.0;
  double condition = 0.0;
};

/// Singular values of the scaled DOF x shape matrix on a generic cell.
UnisolvenceReport unisolvence(ElementKind kind);
UnisolvenceReport unisolvence(const Eigen::MatrixXd& dof_by_shape);

enum class BubbleSpace { Prism, Triangle2D, TetNC, TriNC };

struct RankReport {
  int num_bubbles = 0;
  int rank = 0;
  int target = 0;
  double rm_projection = 0.0;  // max |(div b, r)| / (|div b| |r|) over bubbles b, rigid motions r
  double expansion_residual = 0.0;
};

/// Rank of the divergences of the bubble space, expanded in the local displacement
/// space (or P2(R2) for the 2D symmetric bubble space), and their rigid-motion content.
RankReport bubble_divergence_rank(BubbleSpace space);

/// Numerical rank of a matrix (relative tolerance on singular values).
int numerical_rank(const Eigen::MatrixXd& m, double rel_tol = 1e-10);

/// Rank of {lambda_a} u {(l_i - l_j) l_l, (l_i - l_j) l_m} u {l_i l_j} for each pair (i, j)
/// of a simplex of the given dimension. Target 7 in 3D and 5 in 2D.
std::vector<int> pair_space_ranks(int dim);

/// Largest residual of expanding div tau in the local displacement space.
double divergence_inclusion_residual(const ElementBasis& basis);

/// Fixed generic (non-symmetric) cells used by the certificates.
TriangleCell reference_triangle_cell();
TetCell reference_tet_cell();
PrismCell reference_prism_cell();

}  // namespace elastfem
