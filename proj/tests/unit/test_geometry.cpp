#include <cmath>
#include <set>
#include <utility>

#include "doctest.h"
#include "vortexlayer/error.hpp"
#include "vortexlayer/geometry.hpp"

using namespace vortexlayer;

TEST_CASE("build_grid counts faces and spacing") {
  const Grid g = build_grid(2, 2, 1.0, 1.0);
  CHECK(g.dx() == 0.5);
  CHECK(g.dy() == 0.5);
  CHECK(g.boundary_faces().size() == 8);

  const Grid r = build_grid(4, 2, 2.0, 1.0);
  CHECK(r.dx() == 0.5);
  CHECK(r.dy() == 0.5);
  CHECK(r.boundary_faces().size() == 12);
}

TEST_CASE("boundary normals sum to zero") {
  const Vec2 s = boundary_normal_sum(build_grid(10, 10, 1.0, 1.0));
  CHECK(std::abs(s.x) < 1e-14);
  CHECK(std::abs(s.y) < 1e-14);
  const Vec2 r = boundary_normal_sum(build_grid(7, 3, 2.5, 0.3));
  CHECK(std::abs(r.x) < 1e-14);
  CHECK(std::abs(r.y) < 1e-14);
}

TEST_CASE("invalid grids are rejected") {
  CHECK_THROWS_AS(build_grid(0, 4, 1.0, 1.0), Error);
  CHECK_THROWS_AS(build_grid(4, 4, -1.0, 1.0), Error);
  CHECK_THROWS_AS(build_grid(4, 4, 1.0, 0.0), Error);
}

TEST_CASE("distance_to_boundary examples") {
  const Grid g3 = build_grid(3, 3, 1.0, 1.0);
  CHECK(distance_to_boundary(g3, g3.index(1, 1)) == doctest::Approx(0.5));
  const Grid g4 = build_grid(4, 4, 1.0, 1.0);
  CHECK(distance_to_boundary(g4, g4.index(0, 0)) == doctest::Approx(0.125));
  CHECK(distance_to_boundary(g4, g4.index(3, 3)) == doctest::Approx(0.125));
}

TEST_CASE("distance_to_boundary is bounded below and 1-Lipschitz") {
  const Grid g = build_grid(9, 5, 1.8, 0.7);
  const double half = std::min(g.dx(), g.dy()) / 2.0;
  for (std::size_t c = 0; c < g.cell_count(); ++c) {
    CHECK(distance_to_boundary(g, c) >= half - 1e-15);
    const int i = g.column(c);
    const int j = g.row(c);
    if (i + 1 < g.nx()) {
      CHECK(std::abs(distance_to_boundary(g, c) - distance_to_boundary(g, g.index(i + 1, j))) <= g.dx() + 1e-15);
    }
    if (j + 1 < g.ny()) {
      CHECK(std::abs(distance_to_boundary(g, c) - distance_to_boundary(g, g.index(i, j + 1))) <= g.dy() + 1e-15);
    }
  }
}

TEST_CASE("boundary faces cover each side exactly once, counterclockwise") {
  const Grid g = build_grid(5, 3, 1.0, 0.6);
  std::set<std::pair<std::size_t, int>> seen;
  double total_length = 0.0;
  double last_arc = -1.0;
  for (const BoundaryFace& f : g.boundary_faces()) {
    CHECK(seen.insert({f.owner, static_cast<int>(f.side)}).second);
    total_length += f.area;
    CHECK(f.arc > last_arc);
    last_arc = f.arc;
    CHECK(std::hypot(f.normal.x, f.normal.y) == doctest::Approx(1.0));
  }
  CHECK(seen.size() == 2 * (5 + 3));
  CHECK(total_length == doctest::Approx(g.perimeter()));
  CHECK(g.boundary_faces()[0].side == Side::Bottom);
  CHECK(g.boundary_faces()[0].owner == g.index(0, 0));
}

TEST_CASE("face_index, inward_cell and corner cells agree") {
  const Grid g = build_grid(6, 4, 1.5, 1.0);
  const auto faces = g.boundary_faces();
  for (int k = 0; k < g.nx(); ++k) {
    const BoundaryFace& bottom = faces[g.face_index(Side::Bottom, k)];
    CHECK(bottom.side == Side::Bottom);
    CHECK(bottom.owner == g.index(k, 0));
    CHECK(g.inward_cell(bottom, 2) == g.index(k, 2));
    CHECK(g.cells_along_normal(bottom) == g.ny());
    CHECK(g.normal_spacing(bottom) == g.dy());
    const BoundaryFace& top = faces[g.face_index(Side::Top, k)];
    CHECK(top.owner == g.index(k, g.ny() - 1));
    CHECK(g.inward_cell(top, 1) == g.index(k, g.ny() - 2));
  }
  for (int k = 0; k < g.ny(); ++k) {
    const BoundaryFace& left = faces[g.face_index(Side::Left, k)];
    CHECK(left.owner == g.index(0, k));
    CHECK(g.inward_cell(left, 3) == g.index(3, k));
    CHECK(g.normal_spacing(left) == g.dx());
    const BoundaryFace& right = faces[g.face_index(Side::Right, k)];
    CHECK(right.owner == g.index(g.nx() - 1, k));
  }
  int corners = 0;
  for (std::size_t c = 0; c < g.cell_count(); ++c) corners += g.is_corner_cell(c) ? 1 : 0;
  CHECK(corners == 4);
}
