#include "ampcc/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json_util.hpp"

namespace ampcc {

using jsonu::check_keys;
using jsonu::fail;
using jsonu::get_fixed_array;
using jsonu::get_int;
using jsonu::get_num;
using jsonu::get_section;
using jsonu::Json;

namespace {

void get_bound(const Json& j, const std::string& origin, const std::string& path,
               const char* key, Bound& b) {
  double v[2] = {b.lo, b.hi};
  get_fixed_array(j, origin, path, key, v, 2);
  b.lo = v[0];
  b.hi = v[1];
}

void require_multiple(double a, double b, const char* what) {
  const double ratio = a / b;
  if (!(ratio >= 1.0 - 1e-9) || std::abs(ratio - std::round(ratio)) > 1e-6)
    throw ConfigError(std::string(what) + " must be an integer multiple");
}

}  // namespace

void SimConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("sim.dt must be positive");
  if (!(control_period > 0.0)) throw ConfigError("sim.control_period must be positive");
  if (!(reference_period >= control_period))
    throw ConfigError("sim.reference_period must be >= sim.control_period");
  if (!(goal_tolerance > 0.0)) throw ConfigError("sim.goal_tolerance must be positive");
  if (!(timeout > 0.0)) throw ConfigError("sim.timeout must be positive");
  if (!(sensing_radius > 0.0)) throw ConfigError("sim.sensing_radius must be positive");
}

void PlannerConfig::validate() const {
  if (schema_version != 1) throw ConfigError("unsupported schema_version");
  easa.validate();
  low_mpc.validate();
  high_mpcc.validate();
  sim.validate();
  if (!(guide_clearance >= 0.0)) throw ConfigError("guide.clearance must be >= 0");
  // The closed loop consumes whole plan steps per control period and whole
  // ticks per plan step.
  require_multiple(high_mpcc.dt, sim.dt, "high_mpcc.dt / sim.dt");
  require_multiple(sim.control_period, high_mpcc.dt, "sim.control_period / high_mpcc.dt");
}

PlannerConfig default_planner_config() { return PlannerConfig{}; }

PlannerConfig parse_planner_config(const std::string& text, const std::string& origin) {
  const Json j = jsonu::parse_text(text, origin);
  if (!j.is_object()) fail(origin, "top level must be an object");
  check_keys(j, origin, "",
             {"schema_version", "easa", "low_mpc", "high_mpcc", "guide", "optimizer", "sim"});

  PlannerConfig c;
  c.schema_version = get_int(j, origin, "", "schema_version", 1);
  if (c.schema_version != 1)
    fail(origin, "schema_version " + std::to_string(c.schema_version) + " not supported (expected 1)");

  if (const Json* s = get_section(j, origin, "easa")) {
    check_keys(*s, origin, "easa.", {"alpha", "speed_epsilon", "gradient_epsilon"});
    c.easa.alpha = get_num(*s, origin, "easa.", "alpha", c.easa.alpha);
    c.easa.speed_epsilon = get_num(*s, origin, "easa.", "speed_epsilon", c.easa.speed_epsilon);
    c.easa.gradient_epsilon =
        get_num(*s, origin, "easa.", "gradient_epsilon", c.easa.gradient_epsilon);
  }

  if (const Json* s = get_section(j, origin, "low_mpc")) {
    check_keys(*s, origin, "low_mpc.",
               {"kappa", "clearance_threshold", "dt", "ref_speed", "horizon"});
    double kappa[3] = {c.low_mpc.kappa_similarity, c.low_mpc.kappa_clearance,
                       c.low_mpc.kappa_smoothness};
    get_fixed_array(*s, origin, "low_mpc.", "kappa", kappa, 3);
    c.low_mpc.kappa_similarity = kappa[0];
    c.low_mpc.kappa_clearance = kappa[1];
    c.low_mpc.kappa_smoothness = kappa[2];
    c.low_mpc.clearance_threshold =
        get_num(*s, origin, "low_mpc.", "clearance_threshold", c.low_mpc.clearance_threshold);
    c.low_mpc.dt = get_num(*s, origin, "low_mpc.", "dt", c.low_mpc.dt);
    c.low_mpc.ref_speed = get_num(*s, origin, "low_mpc.", "ref_speed", c.low_mpc.ref_speed);
    c.low_mpc.horizon = get_int(*s, origin, "low_mpc.", "horizon", c.low_mpc.horizon);
  }

  if (const Json* s = get_section(j, origin, "high_mpcc")) {
    check_keys(*s, origin, "high_mpcc.",
               {"lambda", "horizon", "dt", "speed_threshold", "clearance_threshold",
                "speed_smooth_eps", "v_bound", "a_bound", "j_bound", "v_theta_bound"});
    double lambda[5] = {c.high_mpcc.lambda_similarity, c.high_mpcc.lambda_progress,
                        c.high_mpcc.lambda_adaptive, c.high_mpcc.lambda_clearance,
                        c.high_mpcc.lambda_feasibility};
    get_fixed_array(*s, origin, "high_mpcc.", "lambda", lambda, 5);
    c.high_mpcc.lambda_similarity = lambda[0];
    c.high_mpcc.lambda_progress = lambda[1];
    c.high_mpcc.lambda_adaptive = lambda[2];
    c.high_mpcc.lambda_clearance = lambda[3];
    c.high_mpcc.lambda_feasibility = lambda[4];
    c.high_mpcc.horizon = get_int(*s, origin, "high_mpcc.", "horizon", c.high_mpcc.horizon);
    c.high_mpcc.dt = get_num(*s, origin, "high_mpcc.", "dt", c.high_mpcc.dt);
    c.high_mpcc.speed_threshold =
        get_num(*s, origin, "high_mpcc.", "speed_threshold", c.high_mpcc.speed_threshold);
    c.high_mpcc.clearance_threshold = get_num(*s, origin, "high_mpcc.", "clearance_threshold",
                                              c.high_mpcc.clearance_threshold);
    c.high_mpcc.speed_smooth_eps =
        get_num(*s, origin, "high_mpcc.", "speed_smooth_eps", c.high_mpcc.speed_smooth_eps);
    get_bound(*s, origin, "high_mpcc.", "v_bound", c.high_mpcc.v_bound);
    get_bound(*s, origin, "high_mpcc.", "a_bound", c.high_mpcc.a_bound);
    get_bound(*s, origin, "high_mpcc.", "j_bound", c.high_mpcc.j_bound);
    get_bound(*s, origin, "high_mpcc.", "v_theta_bound", c.high_mpcc.v_theta_bound);
  }

  if (const Json* s = get_section(j, origin, "guide")) {
    check_keys(*s, origin, "guide.", {"clearance"});
    c.guide_clearance = get_num(*s, origin, "guide.", "clearance", c.guide_clearance);
  }

  if (const Json* s = get_section(j, origin, "optimizer")) {
    check_keys(*s, origin, "optimizer.",
               {"max_iterations", "gradient_tolerance", "relative_cost_tolerance", "history",
                "max_line_search_steps", "wolfe_sufficient_decrease", "wolfe_curvature"});
    OptimizeOptions o = c.high_mpcc.optimizer;
    o.max_iterations = get_int(*s, origin, "optimizer.", "max_iterations", o.max_iterations);
    o.gradient_tolerance =
        get_num(*s, origin, "optimizer.", "gradient_tolerance", o.gradient_tolerance);
    o.relative_cost_tolerance = get_num(*s, origin, "optimizer.", "relative_cost_tolerance",
                                        o.relative_cost_tolerance);
    o.history = get_int(*s, origin, "optimizer.", "history", o.history);
    o.max_line_search_steps =
        get_int(*s, origin, "optimizer.", "max_line_search_steps", o.max_line_search_steps);
    o.wolfe_sufficient_decrease = get_num(*s, origin, "optimizer.", "wolfe_sufficient_decrease",
                                          o.wolfe_sufficient_decrease);
    o.wolfe_curvature = get_num(*s, origin, "optimizer.", "wolfe_curvature", o.wolfe_curvature);
    c.high_mpcc.optimizer = o;
    c.low_mpc.optimizer = o;
  }

  if (const Json* s = get_section(j, origin, "sim")) {
    check_keys(*s, origin, "sim.",
               {"dt", "control_period", "reference_period", "goal_tolerance", "timeout",
                "sensing_radius"});
    c.sim.dt = get_num(*s, origin, "sim.", "dt", c.sim.dt);
    c.sim.control_period = get_num(*s, origin, "sim.", "control_period", c.sim.control_period);
    c.sim.reference_period =
        get_num(*s, origin, "sim.", "reference_period", c.sim.reference_period);
    c.sim.goal_tolerance = get_num(*s, origin, "sim.", "goal_tolerance", c.sim.goal_tolerance);
    c.sim.timeout = get_num(*s, origin, "sim.", "timeout", c.sim.timeout);
    c.sim.sensing_radius = get_num(*s, origin, "sim.", "sensing_radius", c.sim.sensing_radius);
  }

  c.high_mpcc.easa = c.easa;
  c.validate();
  return c;
}

PlannerConfig load_planner_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_planner_config(ss.str(), path);
}

std::string serialize_planner_config(const PlannerConfig& config) {
  Json j;
  j["schema_version"] = config.schema_version;
  j["easa"] = {{"alpha", config.easa.alpha},
               {"speed_epsilon", config.easa.speed_epsilon},
               {"gradient_epsilon", config.easa.gradient_epsilon}};
  j["low_mpc"] = {{"kappa", {config.low_mpc.kappa_similarity, config.low_mpc.kappa_clearance,
                             config.low_mpc.kappa_smoothness}},
                  {"clearance_threshold", config.low_mpc.clearance_threshold},
                  {"dt", config.low_mpc.dt},
                  {"ref_speed", config.low_mpc.ref_speed},
                  {"horizon", config.low_mpc.horizon}};
  j["high_mpcc"] = {{"lambda", {config.high_mpcc.lambda_similarity, config.high_mpcc.lambda_progress,
                                config.high_mpcc.lambda_adaptive, config.high_mpcc.lambda_clearance,
                                config.high_mpcc.lambda_feasibility}},
                    {"horizon", config.high_mpcc.horizon},
                    {"dt", config.high_mpcc.dt},
                    {"speed_threshold", config.high_mpcc.speed_threshold},
                    {"clearance_threshold", config.high_mpcc.clearance_threshold},
                    {"speed_smooth_eps", config.high_mpcc.speed_smooth_eps},
                    {"v_bound", {config.high_mpcc.v_bound.lo, config.high_mpcc.v_bound.hi}},
                    {"a_bound", {config.high_mpcc.a_bound.lo, config.high_mpcc.a_bound.hi}},
                    {"j_bound", {config.high_mpcc.j_bound.lo, config.high_mpcc.j_bound.hi}},
                    {"v_theta_bound",
                     {config.high_mpcc.v_theta_bound.lo, config.high_mpcc.v_theta_bound.hi}}};
  j["guide"] = {{"clearance", config.guide_clearance}};
  const OptimizeOptions& o = config.high_mpcc.optimizer;
  j["optimizer"] = {{"max_iterations", o.max_iterations},
                    {"gradient_tolerance", o.gradient_tolerance},
                    {"relative_cost_tolerance", o.relative_cost_tolerance},
                    {"history", o.history},
                    {"max_line_search_steps", o.max_line_search_steps},
                    {"wolfe_sufficient_decrease", o.wolfe_sufficient_decrease},
                    {"wolfe_curvature", o.wolfe_curvature}};
  j["sim"] = {{"dt", config.sim.dt},
              {"control_period", config.sim.control_period},
              {"reference_period", config.sim.reference_period},
              {"goal_tolerance", config.sim.goal_tolerance},
              {"timeout", config.sim.timeout},
              {"sensing_radius", config.sim.sensing_radius}};
  return j.dump(2) + "\n";
}

void save_planner_config(const PlannerConfig& config, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError(path + ": cannot open for writing");
  out << serialize_planner_config(config);
  if (!out) throw ConfigError(path + ": write failed");
}

}  // namespace ampcc
