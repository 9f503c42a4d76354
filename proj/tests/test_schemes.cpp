#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "tpflow/rt0.hpp"
#include "tpflow/schemes.hpp"
#include "tpflow/units.hpp"

using namespace tpf;

namespace {

FluidPair oil_water() {
  FluidPair f;
  f.rho_w = 1000.0;
  f.rho_n = 800.0;
  f.mu_w = 1e-3;
  f.mu_n = 0.3e-3;
  return f;
}

RockModel uniform_rock(int n_cells, double K_md, double Bc = 0.0) {
  RockModel r;
  r.phi.assign(n_cells, 0.2);
  r.K.assign(n_cells, to_si(K_md, "md"));
  r.Bc = to_si(Bc, "bar.md^1/2");
  return r;
}

// left inflow at a fixed rate, right at fixed pressure, walls elsewhere
Mesh inflow_outflow_mesh(int nx, int ny, double Lx, double Ly, double rate,
                         double sw_in) {
  Mesh m = build_structured(nx, ny, Lx, Ly);
  BoundaryData in;
  in.flux_t = -rate / Ly;
  in.has_sw = true;
  in.sw = sw_in;
  BoundaryData out;
  out.kind = BcKind::Dirichlet;
  out.pw = out.pn = to_si(100.0, "bar");
  BoundaryData wall;
  const double t = 1e-9 * Lx;
  BoundarySpec spec;
  spec.emplace_back([t](const Vec2& x) { return x.x() < t; }, in);
  spec.emplace_back([t, Lx](const Vec2& x) { return x.x() > Lx - t; }, out);
  spec.emplace_back(
      [t, Lx](const Vec2& x) { return x.x() >= t && x.x() <= Lx - t; }, wall);
  tag_boundary(m, spec);
  return m;
}

Mesh sealed_mesh(int nx, int ny, double Lx, double Ly) {
  Mesh m = build_structured(nx, ny, Lx, Ly);
  BoundarySpec spec;
  spec.emplace_back([](const Vec2&) { return true; }, BoundaryData{});
  tag_boundary(m, spec);
  return m;
}

Simulator make_sim(const Mesh& m, const FluidPair& f, const RockModel& r) {
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(m.n_cells());
  return Simulator(m, f, r, zero, zero, to_si(100.0, "bar"));
}

} // namespace

TEST_CASE("sealed uniform state is an equilibrium for every scheme") {
  const Mesh m = sealed_mesh(3, 3, 10.0, 10.0);
  const FluidPair f = oil_water(); // no gravity
  const RockModel r = uniform_rock(m.n_cells(), 50.0, 60.0);
  for (const Scheme s : {Scheme::PIMPES, Scheme::HFIMPES, Scheme::STDIMPES}) {
    Simulator sim = make_sim(m, f, r);
    sim.init(Eigen::VectorXd::Constant(m.n_cells(), 0.4));
    for (int k = 0; k < 3; ++k) {
      const StepData d = sim.step(s, 3600.0);
      CHECK(d.violations == 0);
      CHECK(d.max_solver_res <= kSolveTol);
      CHECK(d.compat_defect <= kSolveTol);
    }
    CHECK((sim.state().Sw.array() - 0.4).abs().maxCoeff() < 1e-12);
    CHECK(sim.state().ut.cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("uniform single-phase inflow reproduces the exact velocity") {
  const double rate = to_si(0.63, "m3/day");
  const Mesh m = inflow_outflow_mesh(4, 2, 40.0, 20.0, rate, 1.0);
  const FluidPair f = oil_water();
  const RockModel r = uniform_rock(m.n_cells(), 50.0);
  Simulator sim = make_sim(m, f, r);
  sim.init(Eigen::VectorXd::Ones(m.n_cells()));
  const Vec2 exact(rate / 20.0, 0.0);
  for (int ci = 0; ci < m.n_cells(); ++ci) {
    const Vec2 u = rt0_eval(m, ci, sim.state().ut, m.cells[ci].centroid);
    CHECK((u - exact).norm() < 1e-10 * exact.norm());
  }
  // cellwise divergence-free
  const SpMat B = assemble_divergence(m);
  const Eigen::VectorXd div = B.transpose() * sim.state().ut;
  CHECK(div.cwiseAbs().maxCoeff() < 1e-12 * rate);
}

TEST_CASE("wetting and non-wetting update routes agree") {
  const double rate = to_si(0.63, "m3/day");
  const Mesh m = inflow_outflow_mesh(5, 3, 50.0, 30.0, rate, 1.0);
  FluidPair f = oil_water();
  const RockModel r = uniform_rock(m.n_cells(), 50.0, 60.0);
  Simulator a = make_sim(m, f, r);
  Simulator b = make_sim(m, f, r);
  Eigen::VectorXd Sw0 = Eigen::VectorXd::Constant(m.n_cells(), 0.05);
  Sw0[0] = 0.8;
  a.init(Sw0);
  b.init(Sw0);
  const double dt = 3600.0;
  for (int k = 0; k < 5; ++k) {
    const Eigen::VectorXd via_n = b.pimpes_step_via_nonwetting(dt);
    a.pimpes_step(dt);
    b.pimpes_step(dt);
    CHECK((a.state().Sw - via_n).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("direction carrier velocities stay consistent with the phase fluxes") {
  const double rate = to_si(0.63, "m3/day");
  const Mesh m = inflow_outflow_mesh(4, 2, 40.0, 20.0, rate, 1.0);
  const FluidPair f = oil_water();
  const RockModel r = uniform_rock(m.n_cells(), 50.0, 60.0);
  Simulator sim = make_sim(m, f, r);
  Eigen::VectorXd Sw0 = Eigen::VectorXd::Constant(m.n_cells(), 0.1);
  Sw0[1] = 0.9;
  sim.init(Sw0);
  const StepData d = sim.pimpes_step(1800.0);
  const SimState& st = sim.state();
  const double scale = st.ut.cwiseAbs().maxCoeff();
  for (int e = 0; e < m.n_edges(); ++e) {
    // q_alpha = f_alpha(S*) * carrier, f_alpha in [0,1]: same sign, no gain
    CHECK(d.qw_e[e] * st.uw_dir[e] >= -1e-24 * scale * scale);
    CHECK(d.qn_e[e] * st.un_dir[e] >= -1e-24 * scale * scale);
    CHECK(std::abs(d.qw_e[e]) <= std::abs(st.uw_dir[e]) * (1.0 + 1e-12));
    CHECK(std::abs(d.qn_e[e]) <= std::abs(st.un_dir[e]) * (1.0 + 1e-12));
  }
}

TEST_CASE("carrier velocities equal the total velocity without capillarity") {
  const double rate = to_si(0.63, "m3/day");
  const Mesh m = inflow_outflow_mesh(4, 2, 40.0, 20.0, rate, 1.0);
  const FluidPair f = oil_water();
  const RockModel r = uniform_rock(m.n_cells(), 50.0, 0.0);
  Simulator sim = make_sim(m, f, r);
  Eigen::VectorXd Sw0 = Eigen::VectorXd::Constant(m.n_cells(), 0.1);
  Sw0[1] = 0.9;
  sim.init(Sw0);
  sim.pimpes_step(1800.0);
  const SimState& st = sim.state();
  const double scale = st.ut.cwiseAbs().maxCoeff();
  CHECK((st.uw_dir - st.ut).cwiseAbs().maxCoeff() < 1e-12 * scale);
  CHECK((st.un_dir - st.ut).cwiseAbs().maxCoeff() < 1e-12 * scale);
}

TEST_CASE("hf-impes and standard impes coincide without capillarity/gravity") {
  const double rate = to_si(0.5, "m3/day");
  const Mesh m = inflow_outflow_mesh(4, 3, 40.0, 30.0, rate, 1.0);
  const FluidPair f = oil_water();
  const RockModel r = uniform_rock(m.n_cells(), 50.0, 0.0);
  Simulator a = make_sim(m, f, r);
  Simulator b = make_sim(m, f, r);
  const Eigen::VectorXd Sw0 = Eigen::VectorXd::Constant(m.n_cells(), 0.2);
  a.init(Sw0);
  b.init(Sw0);
  for (int k = 0; k < 5; ++k) {
    a.step(Scheme::HFIMPES, 3600.0);
    b.step(Scheme::STDIMPES, 3600.0);
  }
  CHECK((a.state().Sw - b.state().Sw).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("all three schemes agree on uniform saturation without capillarity") {
  const double rate = to_si(0.5, "m3/day");
  const Mesh m = inflow_outflow_mesh(3, 2, 30.0, 20.0, rate, 1.0);
  const FluidPair f = oil_water();
  const RockModel r = uniform_rock(m.n_cells(), 50.0, 0.0);
  Simulator a = make_sim(m, f, r);
  Simulator b = make_sim(m, f, r);
  const Eigen::VectorXd Sw0 = Eigen::VectorXd::Constant(m.n_cells(), 0.3);
  a.init(Sw0);
  b.init(Sw0);
  a.step(Scheme::PIMPES, 1800.0);
  b.step(Scheme::HFIMPES, 1800.0);
  CHECK((a.state().Sw - b.state().Sw).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("bounds policy clamps only when asked and records the raw range") {
  const double rate = to_si(10.0, "m3/day"); // deliberately aggressive
  const Mesh m = inflow_outflow_mesh(3, 1, 3.0, 1.0, rate, 1.0);
  const FluidPair f = oil_water();
  const RockModel r = uniform_rock(m.n_cells(), 1000.0);
  Simulator sim = make_sim(m, f, r);
  sim.init(Eigen::VectorXd::Constant(m.n_cells(), 0.0));
  const StepData d = sim.step(Scheme::HFIMPES, 5e4, BoundsPolicy::Clamp);
  CHECK(d.pre_max > 1.0);
  CHECK(d.violations > 0);
  CHECK(sim.state().Sw.maxCoeff() <= 1.0);
  CHECK(sim.state().Sw.minCoeff() >= 0.0);
}

TEST_CASE("adaptive step size honors the CFL target and the clamps") {
  const double rate = to_si(0.63, "m3/day");
  const Mesh m = inflow_outflow_mesh(4, 2, 40.0, 20.0, rate, 1.0);
  const FluidPair f = oil_water();
  const RockModel r = uniform_rock(m.n_cells(), 50.0);
  Simulator sim = make_sim(m, f, r);
  sim.init(Eigen::VectorXd::Ones(m.n_cells()));
  SchemeConfig cfg;
  cfg.adaptive = true;
  cfg.cfl_target = 0.3;
  cfg.dt_min = 1.0;
  cfg.dt_max = 1e9;
  // uniform S_w = 1 and no capillarity: all edge speeds equal |u_t.n|, so
  // the per-cell bound is cfl * phi * |K| / sum_e |F_e||u_t.n|_e
  double expected = 1e9;
  for (int k = 0; k < m.n_cells(); ++k) {
    double outflux = 0.0;
    for (int le = 0; le < 3; ++le) {
      const int e = m.cells[k].edge[le];
      outflux += m.edges[e].length * std::abs(sim.state().ut[e]);
    }
    if (outflux > 0.0)
      expected = std::min(expected, 0.3 * r.phi[k] * m.cells[k].area / outflux);
  }
  CHECK(sim.suggest_dt(cfg) == doctest::Approx(expected).epsilon(1e-12));
  cfg.dt_max = 10.0;
  CHECK(sim.suggest_dt(cfg) == 10.0);
}

TEST_CASE("run loop stops at end_time and counts steps") {
  const double rate = to_si(0.63, "m3/day");
  const Mesh m = inflow_outflow_mesh(4, 2, 40.0, 20.0, rate, 1.0);
  const FluidPair f = oil_water();
  const RockModel r = uniform_rock(m.n_cells(), 50.0);
  Simulator sim = make_sim(m, f, r);
  sim.init(Eigen::VectorXd::Ones(m.n_cells()));
  SchemeConfig cfg;
  cfg.dt = 1000.0;
  cfg.max_steps = 100;
  cfg.end_time = 4500.0;
  int steps = 0;
  sim.run(cfg, [&](const Simulator&, const StepData&) { ++steps; });
  CHECK(steps == 5); // 4 full steps plus the 500 s remainder
  CHECK(sim.state().t == doctest::Approx(4500.0).epsilon(1e-14));
}

TEST_CASE("state checkpoint round trip") {
  const double rate = to_si(0.63, "m3/day");
  const Mesh m = inflow_outflow_mesh(3, 2, 30.0, 20.0, rate, 1.0);
  const FluidPair f = oil_water();
  const RockModel r = uniform_rock(m.n_cells(), 50.0, 60.0);
  Simulator sim = make_sim(m, f, r);
  Eigen::VectorXd Sw0 = Eigen::VectorXd::Constant(m.n_cells(), 0.15);
  sim.init(Sw0);
  sim.pimpes_step(1234.5);

  std::stringstream buf;
  write_state(buf, sim.state());
  const SimState back = read_state(buf);
  CHECK(back.t == sim.state().t);
  CHECK(back.step == sim.state().step);
  CHECK((back.Sw - sim.state().Sw).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.ut - sim.state().ut).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.uw_dir - sim.state().uw_dir).cwiseAbs().maxCoeff() == 0.0);

  std::stringstream bad("NOTASTATE 1\n");
  CHECK_THROWS_AS(read_state(bad), std::runtime_error);
}
