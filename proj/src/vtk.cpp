#include "tpflow/vtk.hpp"

#include <ostream>

#include "tpflow/rt0.hpp"

namespace tpf {

namespace {

void scalar_section(std::ostream& out, const char* name,
                    const Eigen::VectorXd& v) {
  out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (int i = 0; i < v.size(); ++i) out << v[i] << "\n";
}

} // namespace

void write_vtk(std::ostream& out, const Mesh& mesh, const SimState& state,
               const RockModel& rock) {
  out.precision(12);
  out << "# vtk DataFile Version 3.0\n";
  out << "two-phase flow snapshot t=" << state.t << " s\n";
  out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.vertices.size() << " double\n";
  for (const auto& p : mesh.vertices)
    out << p.x() << " " << p.y() << " 0\n";
  out << "CELLS " << mesh.n_cells() << " " << 4 * mesh.n_cells() << "\n";
  for (const auto& c : mesh.cells)
    out << "3 " << c.v[0] << " " << c.v[1] << " " << c.v[2] << "\n";
  out << "CELL_TYPES " << mesh.n_cells() << "\n";
  for (int i = 0; i < mesh.n_cells(); ++i) out << "5\n";

  out << "CELL_DATA " << mesh.n_cells() << "\n";
  scalar_section(out, "S_w", state.Sw);
  scalar_section(out, "S_n",
                 Eigen::VectorXd::Ones(state.Sw.size()) - state.Sw);
  scalar_section(out, "p_w", state.pw);
  scalar_section(out, "p_n", state.pn);
  Eigen::VectorXd K(mesh.n_cells());
  for (int i = 0; i < mesh.n_cells(); ++i) K[i] = rock.K[i];
  scalar_section(out, "K", K);

  out << "VECTORS u_t double\n";
  for (int i = 0; i < mesh.n_cells(); ++i) {
    const Vec2 u = rt0_eval(mesh, i, state.ut, mesh.cells[i].centroid);
    out << u.x() << " " << u.y() << " 0\n";
  }
}

} // namespace tpf
