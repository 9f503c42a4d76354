#include "tpflow/rt0.hpp"

#include <sstream>
#include <stdexcept>
#include <vector>

namespace tpf {

Vec2 rt0_basis(const Mesh& mesh, int cell, int local_edge, const Vec2& x) {
  const auto& c = mesh.cells[cell];
  const auto& e = mesh.edges[c.edge[local_edge]];
  const Vec2 opposite = mesh.vertices[c.v[local_edge]];
  return c.sign[local_edge] * e.length / (2.0 * c.area) * (x - opposite);
}

double rt0_divergence(const Mesh& mesh, int cell, int local_edge) {
  const auto& c = mesh.cells[cell];
  const auto& e = mesh.edges[c.edge[local_edge]];
  return c.sign[local_edge] * e.length / c.area;
}

Vec2 rt0_eval(const Mesh& mesh, int cell, const Eigen::VectorXd& dofs,
              const Vec2& x) {
  Vec2 v = Vec2::Zero();
  for (int i = 0; i < 3; ++i)
    v += dofs[mesh.cells[cell].edge[i]] * rt0_basis(mesh, cell, i, x);
  return v;
}

Eigen::Matrix3d local_mass(const Mesh& mesh, int cell, double coef) {
  const auto& c = mesh.cells[cell];
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  const double w = c.area / 3.0;
  for (int q = 0; q < 3; ++q) {
    const Vec2 xq = mesh.edges[c.edge[q]].midpoint;
    Vec2 phi[3];
    for (int i = 0; i < 3; ++i) phi[i] = rt0_basis(mesh, cell, i, xq);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) m(i, j) += w * phi[i].dot(phi[j]) / coef;
  }
  return m;
}

SpMat assemble_mass(const Mesh& mesh, const Eigen::VectorXd& coef) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(9 * mesh.n_cells());
  for (int ci = 0; ci < mesh.n_cells(); ++ci) {
    if (!(coef[ci] > 0.0)) {
      std::ostringstream os;
      os << "nonpositive mobility*permeability in cell " << ci;
      throw std::runtime_error(os.str());
    }
    const Eigen::Matrix3d m = local_mass(mesh, ci, coef[ci]);
    const auto& c = mesh.cells[ci];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trips.emplace_back(c.edge[i], c.edge[j], m(i, j));
  }
  SpMat A(mesh.n_edges(), mesh.n_edges());
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

SpMat assemble_divergence(const Mesh& mesh) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(3 * mesh.n_cells());
  for (int ci = 0; ci < mesh.n_cells(); ++ci) {
    const auto& c = mesh.cells[ci];
    for (int i = 0; i < 3; ++i)
      trips.emplace_back(c.edge[i], ci,
                         c.sign[i] * mesh.edges[c.edge[i]].length);
  }
  SpMat B(mesh.n_edges(), mesh.n_cells());
  B.setFromTriplets(trips.begin(), trips.end());
  return B;
}

Eigen::VectorXd dirichlet_vector(
    const Mesh& mesh,
    const std::function<double(const BoundaryData&, const Vec2&)>& value) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.n_edges());
  for (int ei = 0; ei < mesh.n_edges(); ++ei) {
    const BoundaryData* bd = mesh.boundary_data(ei);
    if (!bd || bd->kind != BcKind::Dirichlet) continue;
    b[ei] = value(*bd, mesh.edges[ei].midpoint) * mesh.edges[ei].length;
  }
  return b;
}

Eigen::VectorXd gravity_vector(const Mesh& mesh, double rho_g,
                               const Vec2& grad_z) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(mesh.n_edges());
  if (rho_g == 0.0) return g;
  for (int ci = 0; ci < mesh.n_cells(); ++ci) {
    const auto& c = mesh.cells[ci];
    for (int i = 0; i < 3; ++i) {
      // int_K phi_i = sign * |F|/2 * (centroid - P_i), exact for linear phi
      const Vec2 integral = c.sign[i] * mesh.edges[c.edge[i]].length / 2.0 *
                            (c.centroid - mesh.vertices[c.v[i]]);
      g[c.edge[i]] += rho_g * grad_z.dot(integral);
    }
  }
  return g;
}

Eigen::VectorXd capillary_coupling(const Mesh& mesh, const Eigen::VectorXd& xi,
                                   const Eigen::VectorXd& fn_cell,
                                   const Eigen::VectorXd& coef) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(mesh.n_edges());
  for (int ci = 0; ci < mesh.n_cells(); ++ci) {
    const auto& c = mesh.cells[ci];
    const Eigen::Matrix3d m = local_mass(mesh, ci, coef[ci]);
    Eigen::Vector3d loc;
    for (int j = 0; j < 3; ++j) loc[j] = xi[c.edge[j]];
    const Eigen::Vector3d r = fn_cell[ci] * (m * loc);
    for (int i = 0; i < 3; ++i) b[c.edge[i]] += r[i];
  }
  return b;
}

Eigen::VectorXd cell_integrals(const Mesh& mesh,
                               const Eigen::VectorXd& density) {
  Eigen::VectorXd f(mesh.n_cells());
  for (int ci = 0; ci < mesh.n_cells(); ++ci)
    f[ci] = density[ci] * mesh.cells[ci].area;
  return f;
}

} // namespace tpf
