#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tpflow/upwind.hpp"

using namespace tpf;

namespace {

Mesh two_cell() { return build_structured(1, 1, 1.0, 1.0); }

void tag_noflow(Mesh& m) {
  BoundarySpec spec;
  spec.emplace_back([](const Vec2&) { return true; }, BoundaryData{});
  tag_boundary(m, spec);
}

int diagonal_edge(const Mesh& m) {
  for (int e = 0; e < m.n_edges(); ++e)
    if (!m.is_boundary(e)) return e;
  return -1;
}

// edge-loop evaluation of the upwind bilinear form with explicit jump
// terms: B(u, chi_K) = sum_e f(S*_e) u_e |e| [chi_K], where the jump is
// taken along the global normal (K_i minus K_j side)
Eigen::MatrixXd jump_form(const Mesh& m, const Eigen::VectorXd& factor) {
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m.n_edges(), m.n_cells());
  for (int e = 0; e < m.n_edges(); ++e) {
    const auto& ed = m.edges[e];
    B(e, ed.cell_in) += m.edges[e].length * factor[e];
    if (ed.cell_out >= 0) B(e, ed.cell_out) -= m.edges[e].length * factor[e];
  }
  return B;
}

} // namespace

TEST_CASE("interior trace follows the direction sign, tie takes K_i") {
  Mesh m = two_cell();
  tag_noflow(m);
  Eigen::VectorXd Sw(2);
  Sw << 0.2, 0.8;
  const int d = diagonal_edge(m);
  Eigen::VectorXd dir = Eigen::VectorXd::Zero(m.n_edges());

  dir[d] = 1.0;
  CHECK(compute_traces(m, Sw, dir, dir).sww[d] == 0.2); // from cell_in
  dir[d] = -1.0;
  CHECK(compute_traces(m, Sw, dir, dir).sww[d] == 0.8); // from cell_out
  dir[d] = 0.0;
  CHECK(compute_traces(m, Sw, dir, dir).sww[d] == 0.2); // tie -> K_i
}

TEST_CASE("wetting and non-wetting traces pick independently") {
  Mesh m = two_cell();
  tag_noflow(m);
  Eigen::VectorXd Sw(2);
  Sw << 0.3, 0.6;
  const int d = diagonal_edge(m);
  Eigen::VectorXd dw = Eigen::VectorXd::Zero(m.n_edges());
  Eigen::VectorXd dn = Eigen::VectorXd::Zero(m.n_edges());
  dw[d] = 1.0;
  dn[d] = -1.0; // counter-current across the diagonal
  const UpwindTraces tr = compute_traces(m, Sw, dw, dn);
  CHECK(tr.sww[d] == 0.3);
  CHECK(tr.swn[d] == 0.6); // S*_{w,n} is S_w of the cell the n-phase leaves
}

TEST_CASE("prescribed inflow requires and uses the boundary saturation") {
  Mesh m = two_cell();
  BoundaryData in;
  in.flux_t = -1e-6;
  SUBCASE("missing saturation is a configuration error") {
    BoundarySpec spec;
    spec.emplace_back([](const Vec2&) { return true; }, in);
    tag_boundary(m, spec);
    const Eigen::VectorXd z = Eigen::VectorXd::Zero(m.n_edges());
    CHECK_THROWS_WITH_AS(
        compute_traces(m, Eigen::VectorXd::Constant(2, 0.5), z, z),
        doctest::Contains("lacks an inflow saturation"), std::runtime_error);
  }
  SUBCASE("boundary saturation wins on inflow edges") {
    in.has_sw = true;
    in.sw = 1.0;
    BoundarySpec spec;
    spec.emplace_back([](const Vec2&) { return true; }, in);
    tag_boundary(m, spec);
    const Eigen::VectorXd z = Eigen::VectorXd::Zero(m.n_edges());
    const UpwindTraces tr =
        compute_traces(m, Eigen::VectorXd::Constant(2, 0.5), z, z);
    for (int e = 0; e < m.n_edges(); ++e)
      if (m.is_boundary(e)) CHECK(tr.sww[e] == 1.0);
  }
}

TEST_CASE("dirichlet edges upwind between boundary and interior values") {
  Mesh m = two_cell();
  BoundaryData dir;
  dir.kind = BcKind::Dirichlet;
  dir.has_sw = true;
  dir.sw = 0.9;
  BoundarySpec spec;
  spec.emplace_back([](const Vec2&) { return true; }, dir);
  tag_boundary(m, spec);
  const Eigen::VectorXd Sw = Eigen::VectorXd::Constant(2, 0.4);
  Eigen::VectorXd inflow = Eigen::VectorXd::Constant(m.n_edges(), -1.0);
  Eigen::VectorXd outflow = Eigen::VectorXd::Constant(m.n_edges(), 1.0);
  const UpwindTraces ti = compute_traces(m, Sw, inflow, inflow);
  const UpwindTraces to = compute_traces(m, Sw, outflow, outflow);
  for (int e = 0; e < m.n_edges(); ++e) {
    if (!m.is_boundary(e)) continue;
    CHECK(ti.sww[e] == 0.9);
    CHECK(to.sww[e] == 0.4);
  }
}

TEST_CASE("upwinded divergence equals the explicit jump form") {
  for (const auto dims : {std::pair{1, 1}, std::pair{2, 1}, std::pair{1, 2}}) {
    Mesh m = build_structured(dims.first, dims.second, 1.2, 0.8);
    tag_noflow(m);
    Eigen::VectorXd factor(m.n_edges());
    for (int e = 0; e < m.n_edges(); ++e) factor[e] = 0.1 + 0.07 * e;
    const Eigen::MatrixXd got = Eigen::MatrixXd(upwinded_divergence(m, factor));
    const Eigen::MatrixXd want = jump_form(m, factor);
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("edge fractional flows complement each other at shared traces") {
  FluidPair f;
  f.mu_n = 0.3e-3;
  RockModel r;
  r.phi = {0.2, 0.2};
  r.K = {1e-13, 1e-13};
  UpwindTraces tr;
  tr.sww = Eigen::VectorXd::Constant(3, 0.37);
  tr.swn = tr.sww;
  const Eigen::VectorXd fw = fw_edge(tr, f, r);
  const Eigen::VectorXd fn = fn_edge(tr, f, r);
  for (int e = 0; e < 3; ++e) {
    CHECK(fw[e] == doctest::Approx(frac_w(0.37, f, r)).epsilon(1e-14));
    CHECK(fw[e] + fn[e] == doctest::Approx(1.0).epsilon(1e-14));
  }
}
