#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "ampcc/types.hpp"
#include "ampcc/voxel_grid.hpp"

namespace ampcc {

/// Map source: a named generator with parameters, or a map file.
struct MapSpec {
  std::string generator;  // "forest" | "gate" | "loop" | "corridor"; empty -> file
  std::string file;
  std::uint64_t seed = 0;
  double resolution = 0.1;

  double density = 0.16;         // forest: obstacles per m^2 of ground area
  double opening = 0.8;          // gate: square opening side (m)
  bool hidden_obstacle = false;  // gate: pillar hidden behind the opening
  double ring_radius = 0.6;      // loop: open-center radius (m)

  /// Clearance used by the start-goal connectivity check (and by the first
  /// planning layer, so generated maps are solvable as checked).
  double check_clearance = 0.3;
};

struct GeneratedMap {
  VoxelGrid grid;
  Vec3 start;
  Vec3 goal;
  std::optional<Vec3> gate_center;  // opening center for gate/loop maps
  int retries = 0;                  // regenerations needed for connectivity
};

/// Deterministic for (generator, parameters, seed). Regenerates with a
/// derived seed when start and goal end up disconnected at check_clearance;
/// throws UnreachableError after 10 retries. File-backed specs perform no
/// connectivity check and provide no start/goal (the scenario must).
GeneratedMap generate_map(const MapSpec& spec);

}  // namespace ampcc
