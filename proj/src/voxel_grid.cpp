#include "ampcc/voxel_grid.hpp"

#include <algorithm>
#include <cmath>

namespace ampcc {

VoxelGrid::VoxelGrid(const Vec3& origin, double resolution, const Vec3i& dims)
    : origin_(origin), resolution_(resolution), dims_(dims) {
  if (!(resolution > 0.0)) {
    throw ContractError("VoxelGrid: resolution must be > 0");
  }
  if (dims.minCoeff() < 1) {
    throw ContractError("VoxelGrid: all dims must be >= 1");
  }
  occ_.assign(static_cast<std::size_t>(dims_.x()) *
                  static_cast<std::size_t>(dims_.y()) *
                  static_cast<std::size_t>(dims_.z()),
              0);
}

bool VoxelGrid::in_bounds(const Vec3& p) const {
  const Vec3 lo = min_corner();
  const Vec3 hi = max_corner();
  for (int a = 0; a < 3; ++a) {
    if (p[a] < lo[a] || p[a] >= hi[a]) return false;
  }
  return true;
}

Vec3i VoxelGrid::world_to_index(const Vec3& p) const {
  const Vec3 lo = min_corner();
  const Vec3 hi = max_corner();
  Vec3i c;
  for (int a = 0; a < 3; ++a) {
    if (p[a] < lo[a] || p[a] >= hi[a]) {
      throw BoundsError(a, p[a], lo[a], hi[a]);
    }
    c[a] = static_cast<int>(std::floor((p[a] - origin_[a]) / resolution_));
    c[a] = std::clamp(c[a], 0, dims_[a] - 1);
  }
  return c;
}

std::size_t VoxelGrid::occupied_count() const {
  std::size_t n = 0;
  for (std::uint8_t v : occ_) n += (v != 0);
  return n;
}

std::vector<Vec3i> traverse_cells(const VoxelGrid& grid, const Vec3& a,
                                  const Vec3& b) {
  // Amanatides-Woo voxel traversal.
  Vec3i cur = grid.world_to_index(a);
  const Vec3i end = grid.world_to_index(b);
  std::vector<Vec3i> cells;
  cells.push_back(cur);
  if (cur == end) return cells;

  const Vec3 dir = b - a;
  Vec3i step;
  Vec3 t_max, t_delta;
  const double res = grid.resolution();
  for (int ax = 0; ax < 3; ++ax) {
    if (dir[ax] > 0) {
      step[ax] = 1;
      const double boundary = grid.origin()[ax] + (cur[ax] + 1) * res;
      t_max[ax] = (boundary - a[ax]) / dir[ax];
      t_delta[ax] = res / dir[ax];
    } else if (dir[ax] < 0) {
      step[ax] = -1;
      const double boundary = grid.origin()[ax] + cur[ax] * res;
      t_max[ax] = (boundary - a[ax]) / dir[ax];
      t_delta[ax] = -res / dir[ax];
    } else {
      step[ax] = 0;
      t_max[ax] = std::numeric_limits<double>::infinity();
      t_delta[ax] = std::numeric_limits<double>::infinity();
    }
  }

  const std::size_t max_steps =
      static_cast<std::size_t>(grid.dims().cast<long>().sum()) * 3 + 8;
  for (std::size_t n = 0; n < max_steps; ++n) {
    int ax = 0;
    if (t_max[1] < t_max[ax]) ax = 1;
    if (t_max[2] < t_max[ax]) ax = 2;
    cur[ax] += step[ax];
    t_max[ax] += t_delta[ax];
    if (!grid.in_bounds(cur)) break;
    cells.push_back(cur);
    if (cur == end) break;
  }
  return cells;
}

bool raycast_free(const VoxelGrid& grid, const Vec3& a, const Vec3& b) {
  for (const Vec3i& c : traverse_cells(grid, a, b)) {
    if (grid.occupied(c)) return false;
  }
  return true;
}

}  // namespace ampcc
