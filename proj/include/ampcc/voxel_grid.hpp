#pragma once

#include <cstdint>
#include <vector>

#include "ampcc/types.hpp"

namespace ampcc {

/// Dense axis-aligned occupancy grid. Cell (i,j,k) spans
/// [origin + (i,j,k)*res, origin + (i+1,j+1,k+1)*res); its center is
/// origin + (i+0.5, j+0.5, k+0.5)*res. Linear storage is x-fastest.
class VoxelGrid {
 public:
  VoxelGrid(const Vec3& origin, double resolution, const Vec3i& dims);

  const Vec3& origin() const { return origin_; }
  double resolution() const { return resolution_; }
  const Vec3i& dims() const { return dims_; }
  std::size_t cell_count() const { return occ_.size(); }

  Vec3 min_corner() const { return origin_; }
  Vec3 max_corner() const {
    return origin_ + resolution_ * dims_.cast<double>();
  }

  std::size_t linear_index(const Vec3i& c) const {
    return static_cast<std::size_t>(c.x()) +
           static_cast<std::size_t>(dims_.x()) *
               (static_cast<std::size_t>(c.y()) +
                static_cast<std::size_t>(dims_.y()) *
                    static_cast<std::size_t>(c.z()));
  }

  bool in_bounds(const Vec3i& c) const {
    return c.x() >= 0 && c.y() >= 0 && c.z() >= 0 && c.x() < dims_.x() &&
           c.y() < dims_.y() && c.z() < dims_.z();
  }
  bool in_bounds(const Vec3& p) const;

  /// Cell containing a world point. Throws BoundsError outside the grid.
  Vec3i world_to_index(const Vec3& p) const;
  /// Center of a cell.
  Vec3 index_to_world(const Vec3i& c) const {
    return origin_ + resolution_ * (c.cast<double>() + Vec3(0.5, 0.5, 0.5));
  }

  bool occupied(const Vec3i& c) const { return occ_[linear_index(c)] != 0; }
  bool occupied(const Vec3& p) const { return occupied(world_to_index(p)); }
  void set_occupied(const Vec3i& c, bool value = true) {
    occ_[linear_index(c)] = value ? 1 : 0;
  }

  std::size_t occupied_count() const;
  const std::vector<std::uint8_t>& occupancy() const { return occ_; }
  std::vector<std::uint8_t>& occupancy() { return occ_; }

 private:
  Vec3 origin_;
  double resolution_;
  Vec3i dims_;
  std::vector<std::uint8_t> occ_;
};

/// True iff every cell traversed by segment [a, b] is free.
/// Both endpoints must be inside the grid.
bool raycast_free(const VoxelGrid& grid, const Vec3& a, const Vec3& b);

/// Cells traversed by segment [a, b] in visiting order (integer traversal).
std::vector<Vec3i> traverse_cells(const VoxelGrid& grid, const Vec3& a,
                                  const Vec3& b);

}  // namespace ampcc
