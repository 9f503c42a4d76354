#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "tpflow/mesh.hpp"

using namespace tpf;

TEST_CASE("structured mesh counts and measures") {
  const Mesh m = build_structured(2, 1, 2.0, 1.0);
  CHECK(m.vertices.size() == 6);
  CHECK(m.n_cells() == 4);
  // 4 horizontal + 3 vertical + 2 diagonal edges
  CHECK(m.n_edges() == 9);
  double area = 0.0;
  for (const auto& c : m.cells) {
    CHECK(c.area == doctest::Approx(0.5).epsilon(1e-14));
    area += c.area;
  }
  CHECK(area == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(m.total_area() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(m.min_diam() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("single rectangle split along the rising diagonal") {
  const Mesh m = build_structured(1, 1, 1.0, 1.0);
  CHECK(m.n_cells() == 2);
  // lower cell owns (0,0),(1,0),(1,1); upper (0,0),(1,1),(0,1)
  CHECK(m.cells[0].centroid.x() == doctest::Approx(2.0 / 3));
  CHECK(m.cells[0].centroid.y() == doctest::Approx(1.0 / 3));
  CHECK(m.cells[1].centroid.x() == doctest::Approx(1.0 / 3));
  CHECK(m.cells[1].centroid.y() == doctest::Approx(2.0 / 3));
}

TEST_CASE("edge orientation invariants") {
  const Mesh m = build_structured(3, 2, 3.0, 2.0);
  m.check();
  for (int e = 0; e < m.n_edges(); ++e) {
    const auto& ed = m.edges[e];
    if (!m.is_boundary(e)) {
      CHECK(ed.cell_in < ed.cell_out);
    } else {
      // outward: normal points away from the sole cell's centroid
      const Vec2 d = ed.midpoint - m.cells[ed.cell_in].centroid;
      CHECK(ed.normal.dot(d) > 0.0);
    }
    CHECK(ed.normal.norm() == doctest::Approx(1.0).epsilon(1e-14));
  }
  // signs match the global orientation
  for (int ci = 0; ci < m.n_cells(); ++ci)
    for (int i = 0; i < 3; ++i) {
      const auto& ed = m.edges[m.cells[ci].edge[i]];
      const double expect = ed.cell_in == ci ? 1.0 : -1.0;
      CHECK(m.cells[ci].sign[i] == expect);
    }
}

TEST_CASE("boundary tagging covers each boundary edge exactly once") {
  Mesh m = build_structured(2, 2, 1.0, 1.0);
  BoundaryData in;
  in.kind = BcKind::Neumann;
  in.flux_t = -1.0;
  BoundaryData wall;

  SUBCASE("partition works") {
    BoundarySpec spec;
    spec.emplace_back([](const Vec2& x) { return x.x() < 1e-12; }, in);
    spec.emplace_back([](const Vec2& x) { return x.x() >= 1e-12; }, wall);
    tag_boundary(m, spec);
    int inflow = 0;
    for (int e = 0; e < m.n_edges(); ++e)
      if (m.is_boundary(e) && m.boundary_data(e)->flux_t < 0.0) ++inflow;
    CHECK(inflow == 2);
  }
  SUBCASE("uncovered edge is an error naming the midpoint") {
    BoundarySpec spec;
    spec.emplace_back([](const Vec2& x) { return x.x() < 1e-12; }, in);
    CHECK_THROWS_WITH_AS(tag_boundary(m, spec),
                         doctest::Contains("not covered"), std::runtime_error);
  }
  SUBCASE("double coverage is an error") {
    BoundarySpec spec;
    spec.emplace_back([](const Vec2&) { return true; }, wall);
    spec.emplace_back([](const Vec2& x) { return x.x() < 1e-12; }, in);
    CHECK_THROWS_WITH_AS(tag_boundary(m, spec),
                         doctest::Contains("more than one"),
                         std::runtime_error);
  }
}

TEST_CASE("mesh text format round trip") {
  Mesh m = build_structured(2, 3, 2.0, 3.0);
  std::vector<MeshTag> tags{{"corner", Vec2(0.0, 0.0)}};
  std::ostringstream os;
  write_mesh(os, m, tags);

  std::istringstream is(os.str());
  std::vector<MeshTag> tags2;
  const Mesh m2 = read_mesh(is, &tags2);
  REQUIRE(m2.n_cells() == m.n_cells());
  REQUIRE(m2.n_edges() == m.n_edges());
  for (int i = 0; i < m.n_cells(); ++i) {
    CHECK(m2.cells[i].v == m.cells[i].v);
    CHECK(m2.cells[i].area == doctest::Approx(m.cells[i].area).epsilon(1e-14));
  }
  REQUIRE(tags2.size() == 1);
  CHECK(tags2[0].name == "corner");
}

TEST_CASE("degenerate input is rejected") {
  CHECK_THROWS_AS(build_structured(0, 1, 1.0, 1.0), std::runtime_error);
  CHECK_THROWS_AS(build_structured(1, 1, -1.0, 1.0), std::runtime_error);
}
