#pragma once

#include <string>

#include "ampcc/high_mpcc.hpp"
#include "ampcc/low_mpc.hpp"
#include "ampcc/types.hpp"

namespace ampcc {

/// Closed-loop harness timing and termination settings.
struct SimConfig {
  double dt = 0.01;               // simulation tick (s)
  double control_period = 0.1;    // local replan interval (s)
  double reference_period = 2.0;  // scheduled reference replan interval (s)
  double goal_tolerance = 0.4;    // meters
  double timeout = 90.0;          // seconds of sim time
  double sensing_radius = 4.0;    // range-limited sensing radius (m)

  void validate() const;
};

/// Every tunable in one document. Unknown keys are rejected on load, absent
/// keys take the defaults below, and a written config re-parses to an
/// identical document.
struct PlannerConfig {
  int schema_version = 1;
  EasaParams easa;
  LowMpcConfig low_mpc;
  HighMpccConfig high_mpcc;
  double guide_clearance = 0.3;  // A* inflation (m)
  SimConfig sim;

  void validate() const;
};

PlannerConfig default_planner_config();

/// Parse from JSON text. `origin` names the source in diagnostics; syntax
/// errors are reported with line:column.
PlannerConfig parse_planner_config(const std::string& text, const std::string& origin);
PlannerConfig load_planner_config(const std::string& path);

std::string serialize_planner_config(const PlannerConfig& config);
void save_planner_config(const PlannerConfig& config, const std::string& path);

}  // namespace ampcc
