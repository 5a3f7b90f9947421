#pragma once

// Sparse saddle-point solve and discrete inf-sup estimate.
//
// The solve factors A_r = A + r D once (D = B^T M^{-1} B, block diagonal
// displacement mass M), runs preconditioned CG on the displacement Schur
// complement of the augmented system and finishes with iterative refinement
// measured on the original block system.

#include "elastfem/assembly.hpp"

#include <Eigen/Dense>

#include <cstdint>

namespace elastfem {

struct SolverOptions {
  double penalty = 1e3;
  double tol = 1e-10;       // relative block residual
  double cg_tol = 1e-12;    // inner Schur CG
  int max_cg = 2000;
  int max_refinements = 20;
  bool supernodal = false;  // BLAS-backed CHOLMOD factorization
};

struct SolveResult {
  Eigen::VectorXd sigma;
  Eigen::VectorXd u;
  double residual = 0.0;  // |[F - A s - B^T u; g - B s]| / |[F; g]|
  int cg_iterations = 0;
  int refinements = 0;
};

/// Solves A s + B^T u = F, B s = g.
SolveResult solve_saddle(const SaddleSystem& system, const Eigen::VectorXd& F, const Eigen::VectorXd& g,
                         const SolverOptions& options = {});
/// F = 0, g = system.load.
SolveResult solve_saddle(const SaddleSystem& system, const SolverOptions& options = {});

double block_residual(const SaddleSystem& system, const Eigen::VectorXd& sigma, const Eigen::VectorXd& u,
                      const Eigen::VectorXd& F, const Eigen::VectorXd& g);

struct InfSupOptions {
  int max_iterations = 400;
  double tol = 1e-8;  // relative Ritz residual of the smallest eigenvalue
  std::uint32_t seed = 1;
  bool supernodal = false;
};

struct InfSupResult {
  double beta = 0.0;        // sqrt of the smallest eigenvalue
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

/// beta^2 = min_v (v, B G^{-1} B^T v) / (v, M v), G = Frobenius mass + D (the H(div) Gram matrix).
/// Requires system.G. Lanczos in the M inner product with full reorthogonalization.
InfSupResult infsup_constant(const SaddleSystem& system, const InfSupOptions& options = {});
/// Dense generalized eigenvalue cross-check for small systems.
InfSupResult infsup_constant_dense(const SaddleSystem& system);

/// Keeps the stress columns with keep[j] != 0.
SaddleSystem restrict_stress(const SaddleSystem& system, const std::vector<char>& keep);

}  // namespace elastfem
