#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Sparse>

#include "tpflow/rt0.hpp"

namespace tpf {

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kSolveTol = 1e-10;

/// Sparse SPD solve with the residual contract
/// ||Ax-b|| <= tol*(||A||*||x|| + ||b||). Throws SolverError otherwise.
Eigen::VectorXd solve_spd(const SpMat& A, const Eigen::VectorXd& b,
                          double* residual = nullptr);

/// Block system  [A  -B] [u]   [ru]
///               [C^T  0] [p] = [rp]
/// with A (N x N, SPD), B (N x M) and C (N x M, the upwinded total
/// divergence; C != B when saturation jumps exist). Neumann-constrained
/// velocity DOFs must be eliminated by the caller.
struct SaddleSystem {
  SpMat A;
  SpMat B;
  SpMat C;
  Eigen::VectorXd ru;
  Eigen::VectorXd rp;
  // All-Neumann problems fix the pressure only up to a constant: pin one
  // cell and repair the compatibility defect of rp.
  bool pin = false;
  int pin_cell = 0;
  double pin_value = 0.0;
};

struct SaddleSolution {
  Eigen::VectorXd u;
  Eigen::VectorXd p;
  double res_u = 0.0;     // relative residual of the velocity block
  double res_p = 0.0;     // relative residual of the mass block
  double compat_defect = 0.0; // relative, before repair (pin mode only)
};

SaddleSolution solve_saddle(const SaddleSystem& sys);

} // namespace tpf
