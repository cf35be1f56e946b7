#pragma once

#include <vector>

#include "ampcc/esdf.hpp"
#include "ampcc/types.hpp"

namespace ampcc {

/// Collision-free guiding path, resampled to uniform arc-length spacing.
/// The final segment may be shorter than `spacing`.
struct GuidePath {
  std::vector<Vec3> points;
  double spacing = 0.0;

  double length() const;
};

/// 26-connected grid A* over cells whose field distance is at least
/// `clearance`. Edge costs are Euclidean center-to-center distances and the
/// heuristic is the Euclidean distance to the goal cell, so the returned
/// cost is Dijkstra-optimal. Ties break on (f, h, linear cell index) for
/// reproducible paths.
///
/// Throws InvalidEndpointError when either endpoint is inside the inflated
/// obstacle set, UnreachableError when no path exists.
std::vector<Vec3i> astar(const EsdfField& field, const Vec3& start,
                         const Vec3& goal, double clearance);

/// Dijkstra over the identical graph; reference oracle for tests.
double dijkstra_cost(const EsdfField& field, const Vec3& start,
                     const Vec3& goal, double clearance);

/// Arc-length uniform resampling of a polyline. First and last points are
/// preserved; a zero-length input collapses to a single point.
GuidePath resample(const std::vector<Vec3>& polyline, double spacing);

/// Cell path to world-space polyline (cell centers).
std::vector<Vec3> cells_to_world(const EsdfField& field,
                                 const std::vector<Vec3i>& cells);

}  // namespace ampcc
