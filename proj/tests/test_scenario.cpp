#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "tpflow/scenario.hpp"
#include "tpflow/units.hpp"
#include "tpflow/vtk.hpp"

using namespace tpf;

namespace {

const char* kDisplacement = R"(
# quarter-scale displacement setup
domain 300 150 m
mesh 10 5
rho_w 1000 kg/m3
rho_n 800 kg/m3
mu_w 1 cP
mu_n 0.3 cP
Bc 60 bar.md^1/2
perm uniform 50 md
init_sw 0.001
bc left inflow_rate 0.63 m3/day sw 1
bc right pressure 100 bar
bc rest noflow
scheme pimpes
dt 0.1 day
max_steps 100
)";

Scenario parse(const std::string& text) {
  std::istringstream is(text);
  return parse_scenario(is);
}

} // namespace

TEST_CASE("displacement config parses to SI values") {
  const Scenario s = parse(kDisplacement);
  CHECK(s.Lx == 300.0);
  CHECK(s.Ly == 150.0);
  CHECK(s.mesh.n_cells() == 100);
  CHECK(s.fluids.rho_w == 1000.0);
  CHECK(s.fluids.rho_n == 800.0);
  CHECK(s.fluids.mu_w == doctest::Approx(1e-3).epsilon(1e-14));
  CHECK(s.fluids.mu_n == doctest::Approx(0.3e-3).epsilon(1e-14));
  CHECK(s.rock.Bc ==
        doctest::Approx(60.0 * 1e5 * std::sqrt(9.869233e-16)).epsilon(1e-14));
  CHECK(s.rock.K[0] == doctest::Approx(50.0 * 9.869233e-16).epsilon(1e-14));
  CHECK(s.cfg.dt == doctest::Approx(8640.0).epsilon(1e-14));
  CHECK(s.cfg.max_steps == 100);
  // defaults
  CHECK(s.rock.beta == 2);
  CHECK(s.rock.phi[0] == 0.2);
  CHECK(s.rock.S_rw == 1e-6);
  CHECK(s.Sw0[0] == 0.001);

  // left boundary carries the injection as a uniform inward flux density
  bool found = false;
  for (int e = 0; e < s.mesh.n_edges(); ++e) {
    if (!s.mesh.is_boundary(e) || s.mesh.edges[e].midpoint.x() > 1e-9)
      continue;
    const BoundaryData* bd = s.mesh.boundary_data(e);
    REQUIRE(bd != nullptr);
    CHECK(bd->kind == BcKind::Neumann);
    CHECK(bd->flux_t ==
          doctest::Approx(-0.63 / 86400.0 / 150.0).epsilon(1e-12));
    CHECK(bd->has_sw);
    CHECK(bd->sw == 1.0);
    found = true;
  }
  CHECK(found);
  // right boundary is held at 100 bar
  for (int e = 0; e < s.mesh.n_edges(); ++e) {
    if (!s.mesh.is_boundary(e) || s.mesh.edges[e].midpoint.x() < 300.0 - 1e-9)
      continue;
    const BoundaryData* bd = s.mesh.boundary_data(e);
    CHECK(bd->kind == BcKind::Dirichlet);
    CHECK(bd->pw == 1e7);
  }
}

TEST_CASE("canonical echo round trip is a fixed point") {
  const Scenario s = parse(kDisplacement);
  const Scenario s2 = parse(s.canonical);
  CHECK(s2.canonical == s.canonical);
  CHECK(s2.cfg.dt == s.cfg.dt);
  CHECK((s2.Sw0 - s.Sw0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(s2.rock.K == s.rock.K);
}

TEST_CASE("config errors name the offending line and key") {
  CHECK_THROWS_WITH_AS(parse("domain 300 150\nmesh 4 2\nmu_w -1 cP\n"),
                       doctest::Contains("mu_w"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("mesh 4 2\n"), doctest::Contains("domain"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse("banana 1\n"), doctest::Contains("unknown key"),
                       ConfigError);
  CHECK_THROWS_AS(parse("domain 1 1 m\n"), ConfigError); // no mesh/bc
  // box that misses every boundary edge
  CHECK_THROWS_WITH_AS(
      parse("domain 1 1 m\nmesh 2 2\nbc box 0.4 0.4 0.6 0.6 noflow\n"),
      doctest::Contains("covers no boundary edges"), ConfigError);
}

TEST_CASE("permeability raster mapping and validation") {
  SUBCASE("single value fills the mesh") {
    std::istringstream is("50");
    const Eigen::VectorXd K = load_permeability_raster(is, 1, 1, false);
    REQUIRE(K.size() == 2);
    CHECK(K[0] == 50.0);
    CHECK(K[1] == 50.0);
  }
  SUBCASE("columns map left to right") {
    std::istringstream is("1 1000");
    const Eigen::VectorXd K = load_permeability_raster(is, 2, 1, false);
    REQUIRE(K.size() == 4);
    CHECK(K[0] == 1.0);  // left rectangle, lower triangle
    CHECK(K[1] == 1.0);  // left rectangle, upper triangle
    CHECK(K[2] == 1000.0);
    CHECK(K[3] == 1000.0);
  }
  SUBCASE("log10 mapping exponentiates") {
    std::istringstream is("0 3");
    const Eigen::VectorXd K = load_permeability_raster(is, 2, 1, true);
    CHECK(K[0] == 1.0);
    CHECK(K[2] == 1000.0);
  }
  SUBCASE("value count must match") {
    std::istringstream is("1 2 3");
    CHECK_THROWS_AS(load_permeability_raster(is, 2, 2, false), ConfigError);
  }
  SUBCASE("nonpositive permeability is rejected") {
    std::istringstream is("1 -2");
    CHECK_THROWS_AS(load_permeability_raster(is, 2, 1, false), ConfigError);
  }
}

TEST_CASE("shipped scenario files parse") {
  for (const char* name :
       {"ex1_viscous_desk.cfg", "ex1_capillary_desk.cfg",
        "ex2_heterogeneous_desk.cfg", "ex3_countercurrent_desk.cfg",
        "ex4_countercurrent_hetero_desk.cfg", "ex1_capillary.cfg",
        "ex2_heterogeneous.cfg", "ex3_countercurrent.cfg",
        "ex4_countercurrent_hetero.cfg"}) {
    INFO(name);
    const Scenario s = parse_scenario_file(std::string(SCENARIO_DIR) + "/" +
                                           name);
    CHECK(s.mesh.n_cells() > 0);
    CHECK(s.Sw0.minCoeff() >= 0.0);
    CHECK(s.Sw0.maxCoeff() <= 1.0);
    const Scenario s2 = parse(s.canonical);
    CHECK(s2.canonical == s.canonical);
  }
}

TEST_CASE("phase relabeling swaps every phase-tagged quantity") {
  const Scenario s = parse(kDisplacement);
  const Scenario r = relabeled(s);
  CHECK(r.fluids.rho_w == s.fluids.rho_n);
  CHECK(r.fluids.mu_w == s.fluids.mu_n);
  CHECK(r.rock.mirrored);
  CHECK((r.Sw0 + s.Sw0 - Eigen::VectorXd::Ones(s.Sw0.size()))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  for (size_t i = 0; i < s.mesh.bcs.size(); ++i) {
    CHECK(r.mesh.bcs[i].pw == s.mesh.bcs[i].pn);
    if (s.mesh.bcs[i].has_sw)
      CHECK(r.mesh.bcs[i].sw == 1.0 - s.mesh.bcs[i].sw);
  }
}

TEST_CASE("vtk snapshot structure") {
  const Mesh m = build_structured(1, 1, 1.0, 1.0);
  SimState st;
  st.Sw = Eigen::VectorXd::Constant(2, 0.3);
  st.pw = Eigen::VectorXd::Constant(2, 1e7);
  st.pn = st.pw;
  st.ut = Eigen::VectorXd::Zero(m.n_edges());
  RockModel r;
  r.phi = {0.2, 0.2};
  r.K = {1e-13, 1e-13};
  std::ostringstream os;
  write_vtk(os, m, st, r);
  const std::string text = os.str();
  CHECK(text.rfind("# vtk DataFile Version 3.0\n", 0) == 0);
  CHECK(text.find("CELLS 2 8\n") != std::string::npos);
  CHECK(text.find("SCALARS S_w double 1") != std::string::npos);
  CHECK(text.find("0.3\n0.3\n") != std::string::npos);

  // reader oracle: re-parse the point and cell counts
  std::istringstream is(text);
  std::string line;
  int points = -1, cells = -1;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "POINTS") ls >> points;
    if (word == "CELLS") ls >> cells;
  }
  CHECK(points == static_cast<int>(m.vertices.size()));
  CHECK(cells == m.n_cells());
}
