#pragma once

#include <Eigen/Sparse>

#include "tpflow/mesh.hpp"
#include "tpflow/physics.hpp"
#include "tpflow/rt0.hpp"

namespace tpf {

/// Single-valued upwind wetting-saturation traces per edge.
/// sww is S*_{w,w} (picked by the wetting-phase flux direction) and
/// swn is S*_{w,n} = 1 - S*_n (picked by the non-wetting direction).
struct UpwindTraces {
  Eigen::VectorXd sww;
  Eigen::VectorXd swn;
};

/// Trace selection per the upwind rule: flux >= 0 takes the K_i side (the
/// cell the edge normal exits), flux < 0 the K_j side. dir_w/dir_n are the
/// averaged phase-velocity normal traces of the previous accepted step.
/// Boundary edges: Neumann edges with prescribed inflow (flux_t < 0) take
/// the boundary saturation (required); Dirichlet edges take the boundary
/// saturation when present and the phase direction points inward, otherwise
/// the interior cell value.
UpwindTraces compute_traces(const Mesh& mesh, const Eigen::VectorXd& Sw,
                            const Eigen::VectorXd& dir_w,
                            const Eigen::VectorXd& dir_n);

/// Divergence matrix with a per-edge scalar factor: entry (edge i, cell j)
/// = sign_i(K_j) * |F_i| * factor[i]. With factor = f_alpha(S*_{w,alpha})
/// this is B^h_alpha; with the f_n*f_w product it is B^h_c.
SpMat upwinded_divergence(const Mesh& mesh, const Eigen::VectorXd& factor);

/// Per-edge fractional-flow factors from the traces.
Eigen::VectorXd fw_edge(const UpwindTraces& tr, const FluidPair& fluids,
                        const RockModel& rock);
Eigen::VectorXd fn_edge(const UpwindTraces& tr, const FluidPair& fluids,
                        const RockModel& rock);

} // namespace tpf
