#pragma once

// Manufactured solutions, error norms, convergence tables and element certificates.

#include "elastfem/assembly.hpp"
#include "elastfem/solver.hpp"

#include <functional>
#include <string>
#include <vector>

namespace elastfem {

/// u = (16, 32, 64) x(1-x) y(1-y) z(1-z) in 3D, (16, 32) x(1-x) y(1-y) in 2D;
/// sigma = 2 mu eps(u) + lambda tr(eps(u)) I, f = div sigma. Fields are cartesian.
struct ManufacturedCase {
  int dim = 3;
  Material material;
  PolyField u, sigma, f;

  Eigen::VectorXd u_at(const Eigen::Vector3d& x) const;
  Eigen::VectorXd sigma_at(const Eigen::Vector3d& x) const;  // symmetric storage
  Eigen::VectorXd f_at(const Eigen::Vector3d& x) const;
  VectorFunction load() const;
};

ManufacturedCase manufactured_case(int dim = 3, const Material& material = {});

/// Mesh parameter of a refinement level: n = 2^(level - 1).
int level_to_n(int level);

struct ErrorNorms {
  double sigma = 0.0;  // |sigma - sigma_h|_0
  double u = 0.0;      // |u - u_h|_0
  double div = 0.0;    // |div_h (sigma - sigma_h)|_0, cell-wise
};

ErrorNorms error_norms(const Discretization& disc, const Eigen::VectorXd& sigma_h, const Eigen::VectorXd& u_h,
                       const ManufacturedCase& mc, int degree = 13);

struct ConvergenceRow {
  int level = 0;
  double h = 0.0;
  double err_sigma = 0.0, order_sigma = 0.0;
  double err_u = 0.0, order_u = 0.0;
  double err_div = 0.0, order_div = 0.0;

  int n_sigma = 0, n_u = 0;
  double residual = 0.0;
  double energy_defect = 0.0;  // |(A s, s) + (f, u)| / |(A s, s)|
  int cg_iterations = 0;
  double seconds = 0.0;
};

struct ConvergenceOptions {
  SolverOptions solver;
  AssemblyOptions assembly;
  int error_degree = 13;
  std::string dump_prefix;  // non-empty: write the system of every level
  std::function<void(const ConvergenceRow&)> progress;
};

inline constexpr int kMaxLevels = 5;

/// Levels 1..levels; a solver failure stops the study and returns the rows so far.
std::vector<ConvergenceRow> convergence_study(ElementKind kind, int levels, const ConvergenceOptions& options = {});

/// Fills order columns as log2(e_{L-1} / e_L); the first row gets 0.
void fill_orders(std::vector<ConvergenceRow>& rows);

std::string convergence_csv_header();
std::string convergence_csv_line(const ConvergenceRow& row);
std::string convergence_csv(const std::vector<ConvergenceRow>& rows);

/// Integral of curl(l1 l2 l3) . (y, -x) over the triangle.
double curl_bubble_moment(const std::array<Eigen::Vector2d, 3>& x);

struct Check {
  std::string name;
  double value = 0.0;
  double bound = 0.0;
  bool pass = false;
  std::string detail;
};

struct Certificate {
  ElementKind kind = ElementKind::Prism;
  std::vector<Check> checks;
  bool pass() const;
  std::string to_text() const;
};

/// Counts, unisolvence, bubble-divergence ranks and trace-compatibility residuals.
Certificate verify_element(ElementKind kind, double tol = 1e-10);

/// Random global stress vector (fixed seed).
Eigen::VectorXd random_sigma(const Discretization& disc, unsigned seed = 3);

}  // namespace elastfem
