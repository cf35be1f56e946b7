#include "ampcc/map_gen.hpp"

#include <cmath>
#include <queue>
#include <random>

#include "ampcc/esdf.hpp"
#include "ampcc/map_io.hpp"

namespace ampcc {

namespace {

std::mt19937_64 make_rng(std::uint64_t seed, int attempt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(attempt)};
  return std::mt19937_64(seq);
}

/// Occupies every cell whose center lies in [lo, hi] (component-wise).
void fill_box(VoxelGrid& grid, const Vec3& lo, const Vec3& hi) {
  const Vec3i dims = grid.dims();
  for (int k = 0; k < dims.z(); ++k)
    for (int j = 0; j < dims.y(); ++j)
      for (int i = 0; i < dims.x(); ++i) {
        const Vec3 c = grid.index_to_world(Vec3i(i, j, k));
        if (c.x() >= lo.x() && c.x() <= hi.x() && c.y() >= lo.y() && c.y() <= hi.y() &&
            c.z() >= lo.z() && c.z() <= hi.z())
          grid.set_occupied(Vec3i(i, j, k));
      }
}

/// Full-height cylinder: occupies cells whose center is within r of (cx, cy).
void fill_cylinder(VoxelGrid& grid, double cx, double cy, double r) {
  const Vec3i dims = grid.dims();
  for (int j = 0; j < dims.y(); ++j)
    for (int i = 0; i < dims.x(); ++i) {
      const Vec3 c = grid.index_to_world(Vec3i(i, j, 0));
      const double dx = c.x() - cx;
      const double dy = c.y() - cy;
      if (dx * dx + dy * dy <= r * r)
        for (int k = 0; k < dims.z(); ++k) grid.set_occupied(Vec3i(i, j, k));
    }
}

/// 6-connected flood fill over cells with distance >= clearance.
bool connected(const VoxelGrid& grid, const Vec3& start, const Vec3& goal, double clearance) {
  const EsdfField field = EsdfField::build(grid);
  auto ok = [&](const Vec3i& c) { return field.at(c) >= clearance; };

  Vec3i s, g;
  try {
    s = grid.world_to_index(start);
    g = grid.world_to_index(goal);
  } catch (const BoundsError&) {
    return false;
  }
  if (!ok(s) || !ok(g)) return false;

  std::vector<std::uint8_t> seen(grid.cell_count(), 0);
  std::queue<Vec3i> q;
  q.push(s);
  seen[grid.linear_index(s)] = 1;
  const Vec3i steps[6] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  while (!q.empty()) {
    const Vec3i c = q.front();
    q.pop();
    if (c == g) return true;
    for (const Vec3i& d : steps) {
      const Vec3i n = c + d;
      if (!grid.in_bounds(n) || !ok(n)) continue;
      std::uint8_t& mark = seen[grid.linear_index(n)];
      if (mark) continue;
      mark = 1;
      q.push(n);
    }
  }
  return false;
}

Vec3i cells_for(const Vec3& extent, double res) {
  return Vec3i(static_cast<int>(std::lround(extent.x() / res)),
               static_cast<int>(std::lround(extent.y() / res)),
               static_cast<int>(std::lround(extent.z() / res)));
}

GeneratedMap make_forest(const MapSpec& spec, int attempt) {
  auto rng = make_rng(spec.seed, attempt);
  const Vec3 origin(0.0, -2.5, 0.0);
  VoxelGrid grid(origin, spec.resolution, cells_for(Vec3(40.0, 5.0, 2.0), spec.resolution));
  const Vec3 start(1.0, 0.0, 1.0);
  const Vec3 goal(39.0, 0.0, 1.0);

  const int count = static_cast<int>(std::floor(spec.density * 40.0 * 5.0));
  std::uniform_real_distribution<double> ux(2.5, 37.5);
  std::uniform_real_distribution<double> uy(-2.5, 2.5);
  std::uniform_real_distribution<double> ur(0.2, 0.35);
  for (int n = 0; n < count; ++n) {
    double cx = 0.0, cy = 0.0;
    for (int tries = 0; tries < 100; ++tries) {
      cx = ux(rng);
      cy = uy(rng);
      const double ds = std::hypot(cx - start.x(), cy - start.y());
      const double dg = std::hypot(cx - goal.x(), cy - goal.y());
      if (ds > 1.6 && dg > 1.6) break;
    }
    fill_cylinder(grid, cx, cy, ur(rng));
  }
  return GeneratedMap{std::move(grid), start, goal, std::nullopt, attempt};
}

GeneratedMap make_gate(const MapSpec& spec, int attempt) {
  auto rng = make_rng(spec.seed, attempt);
  const Vec3 origin(0.0, -2.5, 0.0);
  VoxelGrid grid(origin, spec.resolution, cells_for(Vec3(20.0, 5.0, 3.0), spec.resolution));

  std::uniform_real_distribution<double> uy(-1.2, 1.2);
  std::uniform_real_distribution<double> uz(1.0, 2.0);
  const double oy = uy(rng);
  const double oz = uz(rng);
  const double half = 0.5 * spec.opening;

  fill_box(grid, Vec3(9.85, -2.5, 0.0), Vec3(10.15, 2.5, 3.0));
  // Carve the opening back out of the wall.
  const Vec3i dims = grid.dims();
  for (int k = 0; k < dims.z(); ++k)
    for (int j = 0; j < dims.y(); ++j)
      for (int i = 0; i < dims.x(); ++i) {
        const Vec3 c = grid.index_to_world(Vec3i(i, j, k));
        if (c.x() >= 9.85 && c.x() <= 10.15 && std::abs(c.y() - oy) <= half &&
            std::abs(c.z() - oz) <= half)
          grid.set_occupied(Vec3i(i, j, k), false);
      }

  if (spec.hidden_obstacle) {
    std::uniform_real_distribution<double> jx(-0.3, 0.3);
    std::uniform_real_distribution<double> jy(-0.3, 0.3);
    fill_cylinder(grid, 11.8 + jx(rng), oy + jy(rng), 0.45);
  }

  const Vec3 start(1.5, 0.0, 1.5);
  const Vec3 goal(18.5, 0.0, 1.5);
  return GeneratedMap{std::move(grid), start, goal, Vec3(10.0, oy, oz), attempt};
}

GeneratedMap make_loop(const MapSpec& spec, int attempt) {
  auto rng = make_rng(spec.seed, attempt);
  const Vec3 origin(0.0, -3.0, 0.0);
  VoxelGrid grid(origin, spec.resolution, cells_for(Vec3(12.0, 6.0, 3.0), spec.resolution));

  std::uniform_real_distribution<double> uy(-0.5, 0.5);
  const double cy = uy(rng);
  const double cz = 1.5;

  // Ring: the central slab is solid except for a circular open center.
  const Vec3i dims = grid.dims();
  for (int k = 0; k < dims.z(); ++k)
    for (int j = 0; j < dims.y(); ++j)
      for (int i = 0; i < dims.x(); ++i) {
        const Vec3 c = grid.index_to_world(Vec3i(i, j, k));
        if (c.x() < 5.85 || c.x() > 6.15) continue;
        const double dy = c.y() - cy;
        const double dz = c.z() - cz;
        if (dy * dy + dz * dz >= spec.ring_radius * spec.ring_radius)
          grid.set_occupied(Vec3i(i, j, k));
      }

  const Vec3 start(1.0, 0.0, 1.5);
  const Vec3 goal(11.0, 0.0, 1.5);
  return GeneratedMap{std::move(grid), start, goal, Vec3(6.0, cy, cz), attempt};
}

GeneratedMap make_corridor(const MapSpec& spec, int attempt) {
  auto rng = make_rng(spec.seed, attempt);
  const Vec3 origin(0.0, -3.0, 0.0);
  VoxelGrid grid(origin, spec.resolution, cells_for(Vec3(16.0, 6.0, 2.4), spec.resolution));

  // Staggered half-walls force an S-shaped route with an approach and a
  // departure phase at each wall. Passages are ~1.3 m so the safe-distance
  // band is genuinely entered while crossing. Wall positions are jittered
  // as well: the opening heights alone quantize to a handful of voxel rows,
  // which made distinct seeds collide onto identical maps.
  std::uniform_real_distribution<double> jitter(-0.2, 0.2);
  std::uniform_real_distribution<double> shift(-0.3, 0.3);
  const double top_a = 1.6 + jitter(rng);
  const double bot_b = -1.6 + jitter(rng);
  const double x_a = 5.0 + shift(rng);
  const double x_b = 10.0 + shift(rng);
  fill_box(grid, Vec3(x_a - 0.15, -3.0, 0.0), Vec3(x_a + 0.15, top_a, 2.4));
  fill_box(grid, Vec3(x_b - 0.15, bot_b, 0.0), Vec3(x_b + 0.15, 3.0, 2.4));
  // Side walls close the cavity so the passages cannot be skirted.
  fill_box(grid, Vec3(0.0, -3.0, 0.0), Vec3(16.0, -2.9, 2.4));
  fill_box(grid, Vec3(0.0, 2.9, 0.0), Vec3(16.0, 3.0, 2.4));

  const Vec3 start(1.0, 0.0, 1.2);
  const Vec3 goal(15.0, 0.0, 1.2);
  return GeneratedMap{std::move(grid), start, goal, std::nullopt, attempt};
}

}  // namespace

GeneratedMap generate_map(const MapSpec& spec) {
  if (spec.generator.empty()) {
    if (spec.file.empty()) throw ConfigError("map spec needs a generator or a file");
    VoxelGrid grid = read_map_file(spec.file);
    return GeneratedMap{std::move(grid), Vec3::Zero(), Vec3::Zero(), std::nullopt, 0};
  }
  if (!(spec.resolution > 0.0)) throw ConfigError("map.resolution must be positive");

  for (int attempt = 0; attempt <= 10; ++attempt) {
    GeneratedMap m = [&] {
      if (spec.generator == "forest") return make_forest(spec, attempt);
      if (spec.generator == "gate") return make_gate(spec, attempt);
      if (spec.generator == "loop") return make_loop(spec, attempt);
      if (spec.generator == "corridor") return make_corridor(spec, attempt);
      throw ConfigError("unknown map generator '" + spec.generator + "'");
    }();
    if (connected(m.grid, m.start, m.goal, spec.check_clearance)) return m;
  }
  throw UnreachableError("map generation: start and goal disconnected after 10 retries (" +
                         spec.generator + ", seed " + std::to_string(spec.seed) + ")");
}

}  // namespace ampcc
