#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "tpflow/mesh.hpp"
#include "tpflow/physics.hpp"
#include "tpflow/schemes.hpp"

namespace tpf {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Fully normalized simulation setup: mesh built and boundary-tagged, all
/// quantities SI. `canonical` is the normalized echo; re-parsing it yields
/// an identical scenario (and an identical echo).
struct Scenario {
  int nx = 0, ny = 0;
  double Lx = 0.0, Ly = 0.0;
  std::string mesh_file;
  Mesh mesh;
  FluidPair fluids;
  RockModel rock;
  Eigen::VectorXd Sw0;
  Eigen::VectorXd Fw_density, Fn_density; // volume rate per bulk area, 1/s
  SchemeConfig cfg;
  int output_every = 0; // 0: final state only
  std::string output_dir = "out";
  std::string canonical;
};

/// Key/value line format, `#` comments; see README for the schema.
/// Paths inside the config are resolved relative to `dir`.
Scenario parse_scenario(std::istream& in, const std::string& dir = ".");
Scenario parse_scenario_file(const std::string& path);

/// Row-major raster of nx*ny values, one per mesh rectangle (both triangles
/// of a rectangle share the value). log10 mapping exponentiates first.
Eigen::VectorXd load_permeability_raster(std::istream& in, int nx, int ny,
                                         bool log10_mapping);

/// The same physical problem with the phase labels swapped: densities,
/// viscosities, residuals, saturations, sources and boundary pressures are
/// exchanged and the capillary law is mirrored.
Scenario relabeled(const Scenario& s);

} // namespace tpf
