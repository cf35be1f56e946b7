#pragma once

#include <limits>
#include <random>
#include <vector>

#include "ampcc/esdf.hpp"
#include "ampcc/voxel_grid.hpp"

namespace testutil {

using ampcc::EsdfField;
using ampcc::Vec3;
using ampcc::Vec3i;
using ampcc::VoxelGrid;

inline std::mt19937_64 seeded_rng(unsigned lo, unsigned hi = 0) {
  std::seed_seq seq{lo, hi, 0x6d657368u};
  return std::mt19937_64(seq);
}

inline VoxelGrid random_grid(std::mt19937_64& rng, int nx, int ny, int nz,
                             double fill, double resolution = 0.5) {
  VoxelGrid grid(Vec3(0.0, 0.0, 0.0), resolution, Vec3i(nx, ny, nz));
  std::bernoulli_distribution occ(fill);
  for (auto& cell : grid.occupancy()) cell = occ(rng) ? 1 : 0;
  return grid;
}

/// O(n^2) distance transform sharing the library's exact arithmetic:
/// integer squared cell distances, then the same float expressions, so the
/// comparison can demand bitwise equality.
inline std::vector<double> brute_force_esdf(const VoxelGrid& grid) {
  const Vec3i dims = grid.dims();
  const double res = grid.resolution();
  std::vector<Vec3i> occ_cells, free_cells;
  for (int k = 0; k < dims.z(); ++k)
    for (int j = 0; j < dims.y(); ++j)
      for (int i = 0; i < dims.x(); ++i) {
        const Vec3i c(i, j, k);
        (grid.occupied(c) ? occ_cells : free_cells).push_back(c);
      }

  std::vector<double> out(grid.cell_count());
  const double sentinel = 10.0 * res * dims.cast<double>().norm();
  for (int k = 0; k < dims.z(); ++k)
    for (int j = 0; j < dims.y(); ++j)
      for (int i = 0; i < dims.x(); ++i) {
        const Vec3i c(i, j, k);
        const auto& others = grid.occupied(c) ? free_cells : occ_cells;
        long best = std::numeric_limits<long>::max();
        for (const Vec3i& o : others) {
          const long dx = o.x() - c.x(), dy = o.y() - c.y(), dz = o.z() - c.z();
          best = std::min(best, dx * dx + dy * dy + dz * dz);
        }
        double d;
        if (best == std::numeric_limits<long>::max()) {
          d = grid.occupied(c) ? -sentinel : sentinel;
        } else if (grid.occupied(c)) {
          d = -(res * std::sqrt(static_cast<double>(best)) - res);
        } else {
          d = res * std::sqrt(static_cast<double>(best));
        }
        out[grid.linear_index(c)] = d;
      }
  return out;
}

/// Polyline cost of a cell path (center-to-center Euclidean sum).
inline double path_cost(const EsdfField& field, const std::vector<Vec3i>& cells) {
  double cost = 0.0;
  for (std::size_t i = 1; i < cells.size(); ++i)
    cost += field.resolution() * (cells[i] - cells[i - 1]).cast<double>().norm();
  return cost;
}

}  // namespace testutil
