#pragma once

#include <vector>

#include <Eigen/Dense>

namespace tpf {

struct FluidPair {
  double rho_w = 1000.0; // kg/m3
  double rho_n = 800.0;
  double mu_w = 1e-3; // Pa.s
  double mu_n = 1e-3;
  double g = 0.0;                           // m/s2
  Eigen::Vector2d grad_z{0.0, -1.0};        // depth increases downward
};

/// Per-cell rock properties plus the constitutive parameters. `mirrored`
/// swaps the roles of the phases in the capillary law so a relabeled
/// (w <-> n) configuration sees a consistent p_c = p_n - p_w.
struct RockModel {
  std::vector<double> phi; // per cell
  std::vector<double> K;   // per cell, m2 (isotropic)
  int beta = 2;
  double Bc = 0.0; // Pa.m
  double S_rw = 1e-6;
  double S_rn = 1e-6;
  double eps_s = 1e-3; // clamp inside p_c
  bool mirrored = false;
};

/// (S_w - S_rw)/(1 - S_rn - S_rw). With clamp_for_pc the result is clamped
/// to [eps_s, 1] as used inside the capillary law.
double effective_saturation(double sw, const RockModel& rock,
                            bool clamp_for_pc = false);

struct Mobility {
  double lw, ln, lt; // 1/(Pa.s)
};

/// Brooks-Corey k_rw = Se^beta, k_rn = (1-Se)^beta with Se clamped to [0,1].
Mobility mobilities(double sw, const FluidPair& fluids, const RockModel& rock);

/// f_w = lambda_w / lambda_t; f_n is computed as 1 - f_w.
double frac_w(double sw, const FluidPair& fluids, const RockModel& rock);

/// Hoteit-Firoozabadi p_c = -(Bc/sqrt(K)) ln(clamp(Se)); natural log.
double capillary_pressure(double sw, const RockModel& rock, int cell);
/// d p_c / d S_w on the unclamped range, 0 where the clamp is active.
double capillary_pressure_deriv(double sw, const RockModel& rock, int cell);

} // namespace tpf
