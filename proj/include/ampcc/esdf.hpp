#pragma once

#include <utility>
#include <vector>

#include "ampcc/types.hpp"
#include "ampcc/voxel_grid.hpp"

namespace ampcc {

/// Interpolated distance sample: value c, gradient, and the per-axis
/// second derivative of the interpolant.
struct EsdfQuery {
  double value = 0.0;
  Vec3 gradient = Vec3::Zero();
  Vec3 second_derivative = Vec3::Zero();
};

/// Same sample with the full second-derivative matrix of the interpolant.
struct EsdfQueryFull {
  double value = 0.0;
  Vec3 gradient = Vec3::Zero();
  Mat3 hessian = Mat3::Zero();
};

/// Euclidean signed distance field over the cell centers of a VoxelGrid.
/// Free cells hold the exact distance to the nearest occupied cell center;
/// occupied cells hold -(distance to nearest free center - resolution),
/// so boundary-occupied cells read 0 and deeper cells go negative.
/// Immutable once built; concurrent queries are safe.
class EsdfField {
 public:
  /// Exact separable squared-distance transform (one 1D pass per axis).
  /// A grid with no occupied cells yields a uniform far sentinel
  /// (10x grid diagonal) whose interpolant has zero gradient.
  static EsdfField build(const VoxelGrid& grid);

  /// Wraps externally computed per-cell distances (synthetic test fields).
  EsdfField(const Vec3& origin, double resolution, const Vec3i& dims,
            std::vector<double> distances);

  const Vec3& origin() const { return origin_; }
  double resolution() const { return resolution_; }
  const Vec3i& dims() const { return dims_; }

  double at(const Vec3i& c) const { return dist_[linear_index(c)]; }
  const std::vector<double>& distances() const { return dist_; }

  /// Valid query box. Axes with >= 4 cells keep a 1.5-cell interpolation
  /// margin on each side; thinner axes are flat-extended and only require
  /// the point inside the grid.
  void query_bounds(Vec3& lo, Vec3& hi) const;

  /// Clamps p into the valid query box. Returns the clamped point and sets
  /// clamped_axis[a] for every axis that moved.
  Vec3 clamp_to_query_bounds(const Vec3& p, bool clamped_axis[3]) const;

  /// Tricubic (Catmull-Rom per axis) sample. C1 across cell boundaries and
  /// reproduces stored values exactly at cell centers.
  /// Throws BoundsError outside the valid query box.
  EsdfQuery query(const Vec3& p) const;

  /// Tricubic sample with all second derivatives of the interpolant,
  /// including mixed terms.
  EsdfQueryFull query_full(const Vec3& p) const;

 private:
  std::size_t linear_index(const Vec3i& c) const {
    return static_cast<std::size_t>(c.x()) +
           static_cast<std::size_t>(dims_.x()) *
               (static_cast<std::size_t>(c.y()) +
                static_cast<std::size_t>(dims_.y()) *
                    static_cast<std::size_t>(c.z()));
  }

  void gather_stencil(const Vec3& p, int base[3], double frac[3],
                      double values[4][4][4]) const;

  Vec3 origin_;
  double resolution_ = 0.0;
  Vec3i dims_ = Vec3i::Zero();
  std::vector<double> dist_;
};

}  // namespace ampcc
