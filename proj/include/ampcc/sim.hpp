#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ampcc/config.hpp"
#include "ampcc/map_gen.hpp"
#include "ampcc/types.hpp"

namespace ampcc {

struct SensingSpec {
  enum class Mode { kFull, kRange };
  Mode mode = Mode::kFull;
  std::optional<double> radius;  // range mode; falls back to sim.sensing_radius
};

/// One closed-loop episode: map source, endpoints, sensing and optional
/// per-scenario limit overrides. An embedded config (if any) replaces the
/// one passed alongside.
struct Scenario {
  std::string name = "scenario";
  MapSpec map;
  std::optional<Vec3> start;  // required for file-backed maps
  std::optional<Vec3> goal;
  SensingSpec sensing;
  std::optional<double> v_max, a_max, j_max, v_theta_max;
  std::optional<PlannerConfig> config;
};

Scenario parse_scenario(const std::string& text, const std::string& origin);
Scenario load_scenario(const std::string& path);

struct LogRow {
  double t = 0.0;
  Vec3 p = Vec3::Zero();
  Vec3 v = Vec3::Zero();
  Vec3 a = Vec3::Zero();
  double clearance = 0.0;  // true-map distance at p
  double eta = 1.0;        // risk weight at (v, true-map gradient)
};

struct ReplanEvent {
  double t = 0.0;
  char layer = 'h';     // 'r' reference chain, 'h' local solve
  std::string trigger;  // "initial" | "period" | "collision" | "control"
  double solve_ms = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct FlightLog {
  std::vector<LogRow> rows;
  std::vector<ReplanEvent> events;
};

struct Metrics {
  bool success = false;
  bool collision = false;
  bool timed_out = false;
  bool planning_failed = false;
  double flight_time = 0.0;
  double path_length = 0.0;
  double min_clearance = 0.0;
  double max_speed = 0.0;
  double final_goal_distance = 0.0;
  int reference_replans = 0;
  int control_replans = 0;
  int esdf_rebuilds = 0;
  int map_retries = 0;

  // Populated when the map has a gate and the vehicle sampled its zone
  // (within 1 m of the gate plane). open_max_speed is the fastest sample at
  // clearance >= the activation threshold.
  int gate_zone_samples = 0;
  double gate_zone_min_speed = 0.0;
  double gate_zone_mean_speed = 0.0;
  double open_max_speed = 0.0;

  // Wall-clock samples; exported through the timings file only, never the
  // deterministic metrics document.
  std::vector<double> low_solve_ms;
  std::vector<double> high_solve_ms;
};

struct EpisodeResult {
  FlightLog log;
  Metrics metrics;
};

EpisodeResult run_episode(const Scenario& scenario, const PlannerConfig& config);

/// Paired ablation: the given config versus the same config with the
/// adaptive weight removed (lambda_adaptive = 0). Returns (on, off).
std::pair<EpisodeResult, EpisodeResult> ablate_easa(const Scenario& scenario,
                                                    const PlannerConfig& config);

void write_flightlog_csv(const FlightLog& log, const std::string& path);

/// Deterministic metrics document (no wall-clock content).
std::string serialize_metrics(const Metrics& m);
void write_metrics_json(const Metrics& m, const std::string& path);

/// Wall-clock solve-time statistics, kept out of the metrics document.
std::string serialize_timings(const Metrics& m);
void write_timings_json(const Metrics& m, const std::string& path);

}  // namespace ampcc
