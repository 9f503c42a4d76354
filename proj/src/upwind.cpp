#include "tpflow/upwind.hpp"

#include <sstream>
#include <stdexcept>

namespace tpf {

namespace {

double boundary_trace(const Mesh& mesh, int ei, const Eigen::VectorXd& Sw,
                      double dir) {
  const auto& e = mesh.edges[ei];
  const BoundaryData* bd = mesh.boundary_data(ei);
  const double interior = Sw[e.cell_in];
  if (!bd) return interior; // untagged boundary edge, treated as outflow
  if (bd->kind == BcKind::Neumann) {
    if (bd->flux_t < 0.0) { // prescribed inflow
      if (!bd->has_sw) {
        std::ostringstream os;
        os << "inflow boundary edge at (" << e.midpoint.x() << ", "
           << e.midpoint.y() << ") lacks an inflow saturation";
        throw std::runtime_error(os.str());
      }
      return bd->sw;
    }
    return interior;
  }
  // Dirichlet: use boundary saturation only when the phase enters the domain
  if (dir < 0.0 && bd->has_sw) return bd->sw;
  return interior;
}

} // namespace

UpwindTraces compute_traces(const Mesh& mesh, const Eigen::VectorXd& Sw,
                            const Eigen::VectorXd& dir_w,
                            const Eigen::VectorXd& dir_n) {
  UpwindTraces tr;
  tr.sww.resize(mesh.n_edges());
  tr.swn.resize(mesh.n_edges());
  for (int ei = 0; ei < mesh.n_edges(); ++ei) {
    const auto& e = mesh.edges[ei];
    if (mesh.is_boundary(ei)) {
      tr.sww[ei] = boundary_trace(mesh, ei, Sw, dir_w[ei]);
      tr.swn[ei] = boundary_trace(mesh, ei, Sw, dir_n[ei]);
      continue;
    }
    tr.sww[ei] = dir_w[ei] >= 0.0 ? Sw[e.cell_in] : Sw[e.cell_out];
    // the non-wetting trace upwinds S_n = 1 - S_w, then S*_{w,n} = 1 - S*_n
    tr.swn[ei] = dir_n[ei] >= 0.0 ? Sw[e.cell_in] : Sw[e.cell_out];
  }
  return tr;
}

SpMat upwinded_divergence(const Mesh& mesh, const Eigen::VectorXd& factor) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(3 * mesh.n_cells());
  for (int ci = 0; ci < mesh.n_cells(); ++ci) {
    const auto& c = mesh.cells[ci];
    for (int i = 0; i < 3; ++i) {
      const int ei = c.edge[i];
      trips.emplace_back(ei, ci,
                         c.sign[i] * mesh.edges[ei].length * factor[ei]);
    }
  }
  SpMat B(mesh.n_edges(), mesh.n_cells());
  B.setFromTriplets(trips.begin(), trips.end());
  return B;
}

Eigen::VectorXd fw_edge(const UpwindTraces& tr, const FluidPair& fluids,
                        const RockModel& rock) {
  Eigen::VectorXd f(tr.sww.size());
  for (int i = 0; i < f.size(); ++i) f[i] = frac_w(tr.sww[i], fluids, rock);
  return f;
}

Eigen::VectorXd fn_edge(const UpwindTraces& tr, const FluidPair& fluids,
                        const RockModel& rock) {
  Eigen::VectorXd f(tr.swn.size());
  for (int i = 0; i < f.size(); ++i)
    f[i] = 1.0 - frac_w(tr.swn[i], fluids, rock);
  return f;
}

} // namespace tpf
