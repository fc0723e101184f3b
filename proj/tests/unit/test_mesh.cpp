// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>
#include <sstream>

#include "aet/mesh.hpp"
#include "doctest.h"

using namespace aet;

namespace {

constexpr double kPi = std::numbers::pi;

double edge_length(const TriMesh& m, const BoundaryEdge& e) { return (m.vertex(e.a) - m.vertex(e.b)).norm(); }

}  // namespace

TEST_CASE("h = 0.02 mesh and its refinement have 7651 and 30301 vertices") {
  const TriMesh m = build_disk_mesh(0.02, 1.0, 0.0);
  CHECK(m.num_vertices() == 7651);
  CHECK(m.num_vertices() >= 6000);
  CHECK(m.num_vertices() <= 10000);
  const NestedMeshPair pair = refine_nested(m);
  CHECK(pair.fine.num_vertices() == 30301);
}

TEST_CASE("coarse mesh invariants") {
  const TriMesh m = build_disk_mesh(0.2, 1.0, 0.0);
  m.validate();
  for (int t = 0; t < m.num_triangles(); ++t) CHECK(m.signed_area(t) > 0.0);
  for (int v : m.boundary_loop()) CHECK(std::abs(m.vertex(v).norm() - 1.0) <= 1e-9);
  CHECK(m.min_angle_degrees() >= 20.0);
  // Every boundary vertex is on Gamma_1 for the full view.
  for (int v : m.boundary_loop()) CHECK(m.in_gamma1(v));
  CHECK(m.interior_vertices().size() + m.boundary_loop().size() == static_cast<std::size_t>(m.num_vertices()));
}

TEST_CASE("mesh area equals the inscribed polygon area") {
  for (double h : {0.2, 0.1, 0.06}) {
    const TriMesh m = build_disk_mesh(h, 1.0, 0.0);
    const double n = static_cast<double>(m.boundary_loop().size());
    const double polygon = 0.5 * n * std::sin(2.0 * kPi / n);
    CHECK(m.area() == doctest::Approx(polygon).epsilon(1e-12));
  }
}

TEST_CASE("quarter view marks an arc of length pi/2") {
  const TriMesh m = build_disk_mesh(0.2, 0.25, 0.0);
  double longest = 0.0;
  double marked = 0.0;
  double unmarked = 0.0;
  for (const auto& e : m.boundary_edges()) {
    longest = std::max(longest, edge_length(m, e));
    (e.gamma1 ? marked : unmarked) += edge_length(m, e);
  }
  CHECK(std::abs(marked - kPi / 2.0) <= longest);
  CHECK(m.gamma1_length() == doctest::Approx(marked));
  // Gamma_1 and Gamma_2 partition the boundary.
  double total = 0.0;
  for (const auto& e : m.boundary_edges()) total += edge_length(m, e);
  CHECK(marked + unmarked == doctest::Approx(total));
}

TEST_CASE("view offset rotates the marked arc") {
  const double offset = 1.0;
  const TriMesh m = build_disk_mesh(0.1, 0.125, offset);
  for (int v : m.boundary_loop()) {
    const double s = std::fmod(m.boundary_angle(v) - offset + 4.0 * kPi, 2.0 * kPi);
    if (m.in_gamma1(v)) CHECK(s <= 2.0 * kPi * 0.125 + 1e-9);
  }
}

TEST_CASE("mesh generation is a pure function of its arguments") {
  const TriMesh a = build_disk_mesh(0.07, 0.5, 0.3);
  const TriMesh b = build_disk_mesh(0.07, 0.5, 0.3);
  CHECK(a.vertices() == b.vertices());
  CHECK(a.triangles() == b.triangles());
}

TEST_CASE("invalid mesh arguments are rejected") {
  CHECK_THROWS_AS(build_disk_mesh(0.0, 1.0, 0.0), DomainError);
  CHECK_THROWS_AS(build_disk_mesh(0.6, 1.0, 0.0), DomainError);
  CHECK_THROWS_AS(build_disk_mesh(0.1, 0.0, 0.0), DomainError);
  CHECK_THROWS_AS(build_disk_mesh(0.1, 1.5, 0.0), DomainError);
  CHECK_THROWS_AS(build_disk_mesh(0.1, 0.5, -0.1), DomainError);
}

TEST_CASE("vertex count grows like h^-2") {
  const double v1 = build_disk_mesh(0.1, 1.0, 0.0).num_vertices();
  const double v2 = build_disk_mesh(0.05, 1.0, 0.0).num_vertices();
  CHECK(v2 / v1 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("nested refinement") {
  const TriMesh coarse = build_disk_mesh(0.15, 0.25, 0.0);
  const NestedMeshPair pair = refine_nested(coarse);
  pair.fine.validate();
  CHECK(pair.fine.num_triangles() == 4 * coarse.num_triangles());
  REQUIRE(pair.injection.size() == static_cast<std::size_t>(coarse.num_vertices()));
  for (int v = 0; v < coarse.num_vertices(); ++v) {
    CHECK((pair.fine.vertex(pair.injection[v]) - coarse.vertex(v)).norm() <= 1e-12);
  }
  // Midpoints are pushed outward onto the circle, so area only grows.
  CHECK(pair.fine.area() >= coarse.area());
  CHECK(pair.fine.area() - coarse.area() < 0.01);
  CHECK(pair.fine.gamma1_length() == doctest::Approx(kPi / 2.0).epsilon(0.05));

  NodalField fine_values(pair.fine.num_vertices());
  for (int v = 0; v < pair.fine.num_vertices(); ++v) fine_values[v] = pair.fine.vertex(v).x();
  const NodalField restricted = pair.restrict_to_coarse(fine_values);
  for (int v = 0; v < coarse.num_vertices(); ++v) CHECK(restricted[v] == coarse.vertex(v).x());
}

TEST_CASE("mesh text format round-trips") {
  const TriMesh m = build_disk_mesh(0.2, 0.125, 0.7);
  std::stringstream ss;
  m.write(ss);
  CHECK(ss.str().rfind("aetmesh v1\nvertices ", 0) == 0);
  const TriMesh r = TriMesh::read(ss);
  CHECK(r.vertices() == m.vertices());
  CHECK(r.triangles() == m.triangles());
  CHECK(r.arc().offset == m.arc().offset);
  CHECK(r.arc().fraction == m.arc().fraction);
  REQUIRE(r.boundary_edges().size() == m.boundary_edges().size());
  for (std::size_t i = 0; i < r.boundary_edges().size(); ++i) {
    CHECK(r.boundary_edges()[i].gamma1 == m.boundary_edges()[i].gamma1);
  }
}

TEST_CASE("mesh reader without arc line recovers the arc from flagged edges") {
  const TriMesh m = build_disk_mesh(0.2, 0.25, 0.0);
  std::stringstream ss;
  m.write(ss);
  std::string text = ss.str();
  text = text.substr(0, text.rfind("arc "));
  std::istringstream in(text);
  const TriMesh r = TriMesh::read(in);
  // Only the flagged vertices survive, so the arc shrinks by less than one edge at each end.
  CHECK(r.arc().fraction <= 0.25);
  CHECK(r.arc().fraction >= 0.25 - 2.0 * m.max_edge_length() / (2.0 * std::numbers::pi));
  for (int v : m.boundary_loop()) CHECK(r.in_gamma1(v) == m.in_gamma1(v));
}

TEST_CASE("malformed mesh files are rejected") {
  std::istringstream wrong_header("mesh v2\n");
  CHECK_THROWS_AS(TriMesh::read(wrong_header), DomainError);
  std::istringstream truncated("aetmesh v1\nvertices 3\n0 0\n1 0\n");
  CHECK_THROWS_AS(TriMesh::read(truncated), DomainError);
}
