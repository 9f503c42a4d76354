#pragma once

#include <iosfwd>

#include "tpflow/physics.hpp"
#include "tpflow/schemes.hpp"

namespace tpf {

/// Legacy VTK ASCII snapshot: unstructured triangle grid with cell scalars
/// S_w, S_n, p_w, p_n, K and the RT0 total velocity evaluated at centroids.
void write_vtk(std::ostream& out, const Mesh& mesh, const SimState& state,
               const RockModel& rock);

} // namespace tpf
