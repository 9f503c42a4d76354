#pragma once

#include <functional>

#include <Eigen/Sparse>

#include "tpflow/mesh.hpp"

namespace tpf {

using SpMat = Eigen::SparseMatrix<double>;

/// RT0 basis value of the DOF attached to local edge i of a cell, evaluated
/// at x. The edge DOF is the constant normal flux density v.n^F on the edge,
/// so phi_i . n^F_j = delta_ij on edge j.
Vec2 rt0_basis(const Mesh& mesh, int cell, int local_edge, const Vec2& x);
/// Cellwise-constant divergence of the same basis function.
double rt0_divergence(const Mesh& mesh, int cell, int local_edge);

/// Evaluates an RT0 DOF vector at a point inside a cell.
Vec2 rt0_eval(const Mesh& mesh, int cell, const Eigen::VectorXd& dofs,
              const Vec2& x);

/// Local mass matrix int_K (1/coef) phi_i . phi_j by the 3-point
/// edge-midpoint rule (exact for quadratic integrands).
Eigen::Matrix3d local_mass(const Mesh& mesh, int cell, double coef);

/// A_h with cellwise coefficient coef = lambda_t * K; throws if coef <= 0.
SpMat assemble_mass(const Mesh& mesh, const Eigen::VectorXd& coef);

/// B_h: entry (edge i, cell j) = sign_i(K_j) * |F_i|.
SpMat assemble_divergence(const Mesh& mesh);

/// Dirichlet boundary vector: entry = value(bc) * |F| on Dirichlet edges
/// (midpoint rule; the boundary normal trace of the edge's own basis is 1).
Eigen::VectorXd dirichlet_vector(
    const Mesh& mesh,
    const std::function<double(const BoundaryData&, const Vec2&)>& value);

/// Gravity vector: entries int_Omega rho g grad_z . phi_i (exact).
Eigen::VectorXd gravity_vector(const Mesh& mesh, double rho_g,
                               const Vec2& grad_z);

/// b_c^h(xi, S): entries int (lambda_t K)^{-1} f_n(S_cell) xi . phi_i with
/// the cell-centered (not upwinded) f_n.
Eigen::VectorXd capillary_coupling(const Mesh& mesh, const Eigen::VectorXd& xi,
                                   const Eigen::VectorXd& fn_cell,
                                   const Eigen::VectorXd& coef);

/// Cell integrals of a cellwise-constant source density.
Eigen::VectorXd cell_integrals(const Mesh& mesh,
                               const Eigen::VectorXd& density);

} // namespace tpf
