#pragma once

// Global assembly of the mixed elasticity system
//
//   [ A  B^T ] [sigma]   [0]
//   [ B   0  ] [  u  ] = [g]      A_ij = (A sigma_j, sigma_i), B_ij = (div sigma_j, v_i), g_i = (f, v_i)
//
// together with the per-cell displacement mass M, the broken div-div term
// D = sum_K B_K^T M_K^{-1} B_K and the Frobenius mass of the stresses.

#include "elastfem/dofmap.hpp"
#include "elastfem/elements.hpp"
#include "elastfem/mesh.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <functional>
#include <string>
#include <variant>

namespace elastfem {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;
using VectorFunction = std::function<Eigen::VectorXd(const Eigen::Vector3d&)>;

struct Material {
  double mu = 0.5;
  double lambda = 1.0;

  /// lambda / (2 mu + dim lambda)
  double kappa(int dim) const { return lambda / (2.0 * mu + dim * lambda); }
};

/// Compliance on symmetric storage: s^T C t = (A s) : t.
Eigen::MatrixXd compliance_matrix(const Material& m, int dim);

/// Mesh, element and global numbering for one element family on the unit square/cube.
class Discretization {
 public:
  static Discretization make(ElementKind kind, int n);
  /// Any oriented mesh of the unit square/cube; n only labels the level.
  static Discretization from_mesh(PrismMesh mesh, int n = 0);
  static Discretization from_mesh(TetMesh mesh, int n = 0);
  static Discretization from_mesh(TriMesh2D mesh, int n = 0);

  ElementKind kind() const { return kind_; }
  int dim() const { return kind_ == ElementKind::TriNC ? 2 : 3; }
  int n() const { return n_; }
  double h() const { return h_; }
  std::size_t num_cells() const { return dofs_.num_cells; }
  const DofMap& dofs() const { return dofs_; }

  ElementBasis element(std::size_t cell) const;
  /// Local coefficients w_j x_{g_j} of a global stress vector.
  Eigen::VectorXd local_sigma(std::size_t cell, const Eigen::VectorXd& sigma) const;

  const PrismMesh& prism_mesh() const { return std::get<PrismMesh>(mesh_); }
  const TetMesh& tet_mesh() const { return std::get<TetMesh>(mesh_); }
  const TriMesh2D& tri_mesh() const { return std::get<TriMesh2D>(mesh_); }

 private:
  ElementKind kind_ = ElementKind::Prism;
  int n_ = 0;
  double h_ = 0.0;
  std::variant<PrismMesh, TetMesh, TriMesh2D> mesh_;
  DofMap dofs_;
};

struct AssemblyOptions {
  int matrix_degree = -1;  // -1: exact for the element's integrands
  int load_degree = 13;
  bool frobenius_mass = false;
};

struct LocalMatrices {
  Eigen::MatrixXd A, B, M, D, G;
  Eigen::VectorXd load;
};

/// Cell rule for the local matrices of an element.
QuadRule matrix_rule(ElementKind kind, int degree = -1);
/// Cell rule for right-hand sides and error norms.
QuadRule accurate_rule(ElementKind kind, int degree);

LocalMatrices local_matrices(const ElementBasis& basis, const Material& material, const VectorFunction* f,
                             const AssemblyOptions& options = {});

struct SaddleSystem {
  ElementKind kind = ElementKind::Prism;
  int dim = 3;
  int n_sigma = 0;
  int n_u = 0;
  SparseMatrix A, B, M, D, G;  // G is empty unless requested
  Eigen::VectorXd load;
};

SaddleSystem assemble(const Discretization& disc, const Material& material, const VectorFunction& f,
                      const AssemblyOptions& options = {});

/// Writes A, B, M and the load as Matrix Market files <prefix>_A.mtx, ... .
void dump_system(const SaddleSystem& system, const std::string& prefix);
void write_matrix_market(const std::string& path, const SparseMatrix& m);
void write_matrix_market(const std::string& path, const Eigen::VectorXd& v);

struct JumpReport {
  int interfaces = 0;
  double max_pointwise = 0.0;  // max |[tau nu]| / max |tau nu|
  double max_moment = 0.0;     // max |int_F [tau nu] . lambda e_c| / (|F| max |tau nu|)
};

/// Normal-trace jumps of a global stress vector across interior facets.
/// Moments are taken against P1 vector fields on each facet.
JumpReport interface_jumps(const Discretization& disc, const Eigen::VectorXd& sigma);

}  // namespace elastfem
