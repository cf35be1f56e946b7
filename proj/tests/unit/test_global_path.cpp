#include <doctest.h>

#include <cmath>

#include "ampcc/esdf.hpp"
#include "ampcc/global_path.hpp"
#include "oracles.hpp"

using namespace ampcc;
using testutil::path_cost;
using testutil::random_grid;
using testutil::seeded_rng;

namespace {

bool adjacent26(const Vec3i& a, const Vec3i& b) {
  const Vec3i d = (a - b).cwiseAbs();
  return d.maxCoeff() == 1;
}

}  // namespace

TEST_CASE("astar on an empty grid walks the straight line") {
  VoxelGrid grid(Vec3::Zero(), 1.0, Vec3i(10, 10, 1));
  const EsdfField field = EsdfField::build(grid);
  const auto path = astar(field, grid.index_to_world(Vec3i(0, 0, 0)),
                          grid.index_to_world(Vec3i(9, 0, 0)), 0.0);
  REQUIRE(path.size() == 10);
  CHECK(path_cost(field, path) == doctest::Approx(9.0));
}

TEST_CASE("astar through a gap equals the dijkstra oracle") {
  VoxelGrid grid(Vec3::Zero(), 1.0, Vec3i(15, 11, 1));
  for (int j = 0; j < 11; ++j)
    if (j != 4) grid.set_occupied(Vec3i(7, j, 0));
  const EsdfField field = EsdfField::build(grid);
  const Vec3 start = grid.index_to_world(Vec3i(1, 8, 0));
  const Vec3 goal = grid.index_to_world(Vec3i(13, 8, 0));
  // Occupied boundary cells sit exactly at distance zero; any positive
  // clearance keeps the search out of them.
  const double clearance = 0.5;
  const auto path = astar(field, start, goal, clearance);
  CHECK(path_cost(field, path) ==
        doctest::Approx(dijkstra_cost(field, start, goal, clearance)));
  bool through_gap = false;
  for (const Vec3i& c : path) through_gap |= (c.x() == 7 && c.y() == 4);
  CHECK(through_gap);
}

TEST_CASE("astar error taxonomy") {
  VoxelGrid grid(Vec3::Zero(), 1.0, Vec3i(9, 9, 1));
  // Box in the goal cell completely.
  for (int dj = -1; dj <= 1; ++dj)
    for (int di = -1; di <= 1; ++di)
      if (di != 0 || dj != 0) grid.set_occupied(Vec3i(6 + di, 6 + dj, 0));
  const EsdfField field = EsdfField::build(grid);
  const Vec3 start = grid.index_to_world(Vec3i(0, 0, 0));
  CHECK_THROWS_AS(astar(field, start, grid.index_to_world(Vec3i(6, 6, 0)), 0.5),
                  UnreachableError);
  CHECK_THROWS_AS(astar(field, start, grid.index_to_world(Vec3i(5, 6, 0)), 0.5),
                  InvalidEndpointError);
  CHECK_THROWS_AS(astar(field, Vec3(100.0, 0.0, 0.0), start, 0.5),
                  InvalidEndpointError);
}

TEST_CASE("astar cost equals dijkstra on random grids") {
  auto rng = seeded_rng(21);
  std::uniform_real_distribution<double> fill(0.05, 0.3);
  int solved = 0;
  for (int trial = 0; trial < 40; ++trial) {
    VoxelGrid grid = random_grid(rng, 16, 16, 3, fill(rng), 1.0);
    const Vec3i s(0, 0, 0), g(15, 15, 2);
    grid.set_occupied(s, false);
    grid.set_occupied(g, false);
    const EsdfField field = EsdfField::build(grid);
    const Vec3 start = grid.index_to_world(s);
    const Vec3 goal = grid.index_to_world(g);
    try {
      const auto path = astar(field, start, goal, 0.5);
      const double oracle = dijkstra_cost(field, start, goal, 0.5);
      CHECK(std::abs(path_cost(field, path) - oracle) < 1e-9);
      for (std::size_t i = 1; i < path.size(); ++i) CHECK(adjacent26(path[i - 1], path[i]));
      ++solved;
    } catch (const UnreachableError&) {
    } catch (const InvalidEndpointError&) {
    }
  }
  CHECK(solved >= 25);
}

TEST_CASE("astar clearance inflation keeps the path off the walls") {
  VoxelGrid grid(Vec3::Zero(), 0.5, Vec3i(20, 9, 1));
  for (int i = 0; i < 20; ++i) {
    grid.set_occupied(Vec3i(i, 0, 0));
    grid.set_occupied(Vec3i(i, 8, 0));
  }
  const EsdfField field = EsdfField::build(grid);
  const double clearance = 1.0;
  const auto path = astar(field, grid.index_to_world(Vec3i(1, 4, 0)),
                          grid.index_to_world(Vec3i(18, 4, 0)), clearance);
  for (const Vec3i& c : path) CHECK(field.at(c) >= clearance);
}

TEST_CASE("resample places points at uniform arc lengths") {
  SUBCASE("straight ten meters, one meter spacing") {
    const std::vector<Vec3> line{Vec3(0, 0, 0), Vec3(10, 0, 0)};
    const GuidePath gp = resample(line, 1.0);
    REQUIRE(gp.points.size() == 11);
    for (int i = 0; i <= 10; ++i)
      CHECK(gp.points[i].x() == doctest::Approx(static_cast<double>(i)));
  }
  SUBCASE("L-shaped walk crosses the corner") {
    const std::vector<Vec3> bend{Vec3(0, 0, 0), Vec3(3, 0, 0), Vec3(3, 4, 0)};
    const GuidePath gp = resample(bend, 3.5);
    REQUIRE(gp.points.size() == 3);
    CHECK(gp.points[0] == Vec3(0, 0, 0));
    // Arc length 3.5 = 3 m along x plus 0.5 m up the second leg.
    CHECK(gp.points[1].x() == doctest::Approx(3.0));
    CHECK(gp.points[1].y() == doctest::Approx(0.5));
    CHECK(gp.points[2] == Vec3(3, 4, 0));
  }
  SUBCASE("spacing longer than the path keeps the endpoints") {
    const std::vector<Vec3> stub{Vec3(0, 0, 0), Vec3(1, 0, 0)};
    const GuidePath gp = resample(stub, 10.0);
    REQUIRE(gp.points.size() == 2);
    CHECK(gp.points.front() == Vec3(0, 0, 0));
    CHECK(gp.points.back() == Vec3(1, 0, 0));
  }
  SUBCASE("zero-length input collapses to one point") {
    const std::vector<Vec3> dot{Vec3(2, 2, 2), Vec3(2, 2, 2)};
    CHECK(resample(dot, 1.0).points.size() == 1);
  }
}

TEST_CASE("resampled polyline never gains length and steps never exceed the spacing") {
  auto rng = seeded_rng(22);
  std::uniform_real_distribution<double> coord(-5.0, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Vec3> poly;
    for (int i = 0; i < 8; ++i) poly.emplace_back(coord(rng), coord(rng), coord(rng));
    double original = 0.0;
    for (std::size_t i = 1; i < poly.size(); ++i) original += (poly[i] - poly[i - 1]).norm();
    const GuidePath gp = resample(poly, 0.7);
    CHECK(gp.length() <= original + 1e-9);
    CHECK(gp.points.front() == poly.front());
    CHECK(gp.points.back() == poly.back());
    // Chords can cut corners but never exceed the arc-length spacing.
    for (std::size_t i = 1; i < gp.points.size(); ++i) {
      CHECK((gp.points[i] - gp.points[i - 1]).norm() <= 0.7 + 1e-9);
    }
  }
}

TEST_CASE("cells_to_world returns cell centers") {
  VoxelGrid grid(Vec3(1.0, 2.0, 3.0), 0.5, Vec3i(4, 4, 4));
  const EsdfField field = EsdfField::build(grid);
  const auto pts = cells_to_world(field, {Vec3i(0, 0, 0), Vec3i(3, 2, 1)});
  CHECK(pts[0] == Vec3(1.25, 2.25, 3.25));
  CHECK(pts[1] == Vec3(2.75, 3.25, 3.75));
}
