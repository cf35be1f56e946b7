#include "ampcc/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>

#include "ampcc/easa.hpp"
#include "ampcc/esdf.hpp"
#include "ampcc/global_path.hpp"
#include "ampcc/high_mpcc.hpp"
#include "ampcc/low_mpc.hpp"
#include "ampcc/reference_trajectory.hpp"
#include "json_util.hpp"

namespace ampcc {

using jsonu::check_keys;
using jsonu::fail;
using jsonu::get_bool;
using jsonu::get_num;
using jsonu::get_int;
using jsonu::get_section;
using jsonu::get_string;
using jsonu::Json;

namespace {

Vec3 get_vec3(const Json& j, const std::string& origin, const char* key, bool& present) {
  present = j.contains(key);
  if (!present) return Vec3::Zero();
  const Json& a = j[key];
  if (!a.is_array() || a.size() != 3 || !a[0].is_number() || !a[1].is_number() ||
      !a[2].is_number())
    fail(origin, std::string("'") + key + "' must be an array of 3 numbers");
  return Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
}

std::optional<double> get_opt_num(const Json& j, const std::string& origin,
                                  const std::string& path, const char* key) {
  if (!j.contains(key)) return std::nullopt;
  if (!j[key].is_number()) fail(origin, "'" + path + key + "' must be a number");
  return j[key].get<double>();
}

}  // namespace

Scenario parse_scenario(const std::string& text, const std::string& origin) {
  const Json j = jsonu::parse_text(text, origin);
  if (!j.is_object()) fail(origin, "top level must be an object");
  check_keys(j, origin, "",
             {"schema_version", "name", "map", "start", "goal", "sensing", "limits", "config"});

  const int version = get_int(j, origin, "", "schema_version", 1);
  if (version != 1)
    fail(origin, "schema_version " + std::to_string(version) + " not supported (expected 1)");

  Scenario s;
  s.name = get_string(j, origin, "", "name", s.name);

  if (const Json* ms = get_section(j, origin, "map")) {
    check_keys(*ms, origin, "map.",
               {"generator", "file", "seed", "resolution", "density", "opening",
                "hidden_obstacle", "ring_radius", "check_clearance"});
    s.map.generator = get_string(*ms, origin, "map.", "generator", "");
    s.map.file = get_string(*ms, origin, "map.", "file", "");
    if (ms->contains("seed")) {
      const Json& sd = (*ms)["seed"];
      if (!sd.is_number_integer() || (sd.is_number_integer() && sd.get<long long>() < 0))
        fail(origin, "'map.seed' must be a non-negative integer");
      s.map.seed = sd.get<std::uint64_t>();
    }
    s.map.resolution = get_num(*ms, origin, "map.", "resolution", s.map.resolution);
    s.map.density = get_num(*ms, origin, "map.", "density", s.map.density);
    s.map.opening = get_num(*ms, origin, "map.", "opening", s.map.opening);
    s.map.hidden_obstacle = get_bool(*ms, origin, "map.", "hidden_obstacle", false);
    s.map.ring_radius = get_num(*ms, origin, "map.", "ring_radius", s.map.ring_radius);
    s.map.check_clearance =
        get_num(*ms, origin, "map.", "check_clearance", s.map.check_clearance);
  } else {
    fail(origin, "'map' section is required");
  }

  bool present = false;
  const Vec3 start = get_vec3(j, origin, "start", present);
  if (present) s.start = start;
  const Vec3 goal = get_vec3(j, origin, "goal", present);
  if (present) s.goal = goal;

  if (const Json* sn = get_section(j, origin, "sensing")) {
    check_keys(*sn, origin, "sensing.", {"mode", "radius"});
    const std::string mode = get_string(*sn, origin, "sensing.", "mode", "full");
    if (mode == "full") {
      s.sensing.mode = SensingSpec::Mode::kFull;
    } else if (mode == "range") {
      s.sensing.mode = SensingSpec::Mode::kRange;
    } else {
      fail(origin, "'sensing.mode' must be \"full\" or \"range\"");
    }
    s.sensing.radius = get_opt_num(*sn, origin, "sensing.", "radius");
  }

  if (const Json* lm = get_section(j, origin, "limits")) {
    check_keys(*lm, origin, "limits.", {"v_max", "a_max", "j_max", "v_theta_max"});
    s.v_max = get_opt_num(*lm, origin, "limits.", "v_max");
    s.a_max = get_opt_num(*lm, origin, "limits.", "a_max");
    s.j_max = get_opt_num(*lm, origin, "limits.", "j_max");
    s.v_theta_max = get_opt_num(*lm, origin, "limits.", "v_theta_max");
  }

  if (const Json* cfg = get_section(j, origin, "config")) {
    s.config = parse_planner_config(cfg->dump(), origin + ":config");
  }
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path + ": cannot open scenario file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path);
}

namespace {

double ms_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

/// A* with a clearance ladder: the nominal inflation, then half, then half a
/// cell, so a vehicle legitimately closer to an obstacle than the nominal
/// clearance can still route out.
std::optional<std::vector<Vec3>> plan_guide(const EsdfField& field, const Vec3& from,
                                            const Vec3& to, double clearance) {
  // The vehicle flies in continuous space and may sit just outside the grid
  // (the domain edge is open); seed the search from the nearest cell inside.
  bool clamped[3];
  const Vec3 seed = field.clamp_to_query_bounds(from, clamped);
  const double levels[3] = {clearance, 0.5 * clearance, 0.5 * field.resolution()};
  for (double level : levels) {
    try {
      return cells_to_world(field, astar(field, seed, to, level));
    } catch (const InvalidEndpointError&) {
    } catch (const UnreachableError&) {
    } catch (const BoundsError&) {
      return std::nullopt;
    }
  }
  return std::nullopt;
}

bool reference_blocked(const VoxelGrid& known, const ReferenceTrajectory& ref,
                       double theta_from) {
  const double end = ref.domain_end();
  if (theta_from >= end) return false;
  // World-space sampling well under a cell even for fast reference segments.
  const double dtheta = 0.125 * known.resolution();
  for (double th = std::max(theta_from, 0.0); th < end; th += dtheta) {
    const Vec3 p = ref.position(th);
    if (known.in_bounds(p) && known.occupied(p)) return true;
  }
  const Vec3 p = ref.position(end);
  return known.in_bounds(p) && known.occupied(p);
}

void integrate_tick(FullState& st, const Vec3& jerk, double jerk_theta, double dt) {
  const double dt2 = dt * dt;
  const double dt3 = dt2 * dt;
  st.position += st.velocity * dt + 0.5 * dt2 * st.acceleration + (dt3 / 6.0) * jerk;
  st.velocity += st.acceleration * dt + 0.5 * dt2 * jerk;
  st.acceleration += dt * jerk;
  st.theta += st.v_theta * dt + 0.5 * dt2 * st.a_theta + (dt3 / 6.0) * jerk_theta;
  st.v_theta += st.a_theta * dt + 0.5 * dt2 * jerk_theta;
  st.a_theta += dt * jerk_theta;
}

}  // namespace

EpisodeResult run_episode(const Scenario& scenario, const PlannerConfig& base_config) {
  const PlannerConfig config = scenario.config ? *scenario.config : base_config;
  config.validate();

  MapSpec mspec = scenario.map;
  mspec.check_clearance = std::max(mspec.check_clearance, config.guide_clearance);
  GeneratedMap gen = generate_map(mspec);

  if (scenario.map.generator.empty() && (!scenario.start || !scenario.goal))
    throw ConfigError("file-backed scenarios must provide start and goal");
  const Vec3 start = scenario.start.value_or(gen.start);
  const Vec3 goal = scenario.goal.value_or(gen.goal);

  HighMpccConfig hcfg = config.high_mpcc;
  if (scenario.v_max) hcfg.v_bound = {-*scenario.v_max, *scenario.v_max};
  if (scenario.a_max) hcfg.a_bound = {-*scenario.a_max, *scenario.a_max};
  if (scenario.j_max) hcfg.j_bound = {-*scenario.j_max, *scenario.j_max};
  if (scenario.v_theta_max) hcfg.v_theta_bound = {0.0, *scenario.v_theta_max};
  const LowMpcConfig& lcfg = config.low_mpc;

  const VoxelGrid& truth = gen.grid;
  const EsdfField truth_esdf = EsdfField::build(truth);

  const bool range_mode = scenario.sensing.mode == SensingSpec::Mode::kRange;
  const double sense_radius = scenario.sensing.radius.value_or(config.sim.sensing_radius);

  VoxelGrid known = truth;
  std::vector<std::pair<Vec3, Vec3i>> hidden;
  if (range_mode) {
    known = VoxelGrid(truth.origin(), truth.resolution(), truth.dims());
    const Vec3i dims = truth.dims();
    for (int k = 0; k < dims.z(); ++k)
      for (int j = 0; j < dims.y(); ++j)
        for (int i = 0; i < dims.x(); ++i) {
          const Vec3i c(i, j, k);
          if (truth.occupied(c)) hidden.emplace_back(truth.index_to_world(c), c);
        }
  }
  EsdfField plan_esdf = EsdfField::build(known);
  bool esdf_dirty = false;
  bool newly_revealed = false;

  EpisodeResult out;
  Metrics& m = out.metrics;
  m.map_retries = gen.retries;
  m.min_clearance = std::numeric_limits<double>::infinity();
  double gate_speed_sum = 0.0;
  double gate_speed_min = std::numeric_limits<double>::infinity();

  FullState st;
  st.position = start;

  std::optional<ReferenceTrajectory> ref;
  VecX plan;
  int plan_base_tick = 0;
  double last_ref_time = 0.0;
  bool ref_blocked_flag = false;
  bool braking = false;
  VecX prev_solution;
  bool warm_valid = false;

  const double dt = config.sim.dt;
  const int ticks_per_step = static_cast<int>(std::lround(hcfg.dt / dt));
  const int control_ticks = static_cast<int>(std::lround(config.sim.control_period / dt));
  const int shift_steps = static_cast<int>(std::lround(config.sim.control_period / hcfg.dt));
  const int max_ticks = static_cast<int>(std::lround(config.sim.timeout / dt));
  const int N = hcfg.horizon;

  int ticks_since_high = control_ticks;
  Vec3 prev_pos = st.position;
  const char* log_env = std::getenv("AMPCC_LOG");
  const bool plan_debug = log_env && log_env[0] == '3';

  for (int tick = 0; tick <= max_ticks; ++tick) {
    const double t = tick * dt;

    if (range_mode && !hidden.empty()) {
      const double r2 = sense_radius * sense_radius;
      for (std::size_t idx = 0; idx < hidden.size();) {
        if ((hidden[idx].first - st.position).squaredNorm() <= r2) {
          known.set_occupied(hidden[idx].second);
          hidden[idx] = hidden.back();
          hidden.pop_back();
          esdf_dirty = true;
          newly_revealed = true;
        } else {
          ++idx;
        }
      }
    }

    bool clamped[3];
    const Vec3 q = truth_esdf.clamp_to_query_bounds(st.position, clamped);
    const EsdfQuery cq = truth_esdf.query(q);
    LogRow row;
    row.t = t;
    row.p = st.position;
    row.v = st.velocity;
    row.a = st.acceleration;
    row.clearance = cq.value;
    row.eta = easa_eta(easa_beta(st.velocity, cq.gradient, config.easa), config.easa);
    out.log.rows.push_back(row);

    const double speed = st.velocity.norm();
    m.max_speed = std::max(m.max_speed, speed);
    m.min_clearance = std::min(m.min_clearance, cq.value);
    m.path_length += (st.position - prev_pos).norm();
    prev_pos = st.position;
    if (gen.gate_center && std::abs(st.position.x() - gen.gate_center->x()) <= 1.0) {
      ++m.gate_zone_samples;
      gate_speed_sum += speed;
      gate_speed_min = std::min(gate_speed_min, speed);
    }
    if (cq.value >= hcfg.clearance_threshold) m.open_max_speed = std::max(m.open_max_speed, speed);

    m.final_goal_distance = (st.position - goal).norm();
    if (truth.in_bounds(st.position) && truth.occupied(st.position)) {
      m.collision = true;
      break;
    }
    if (m.final_goal_distance <= config.sim.goal_tolerance) {
      m.success = true;
      m.flight_time = t;
      break;
    }
    if (tick == max_ticks) {
      m.timed_out = true;
      break;
    }

    if (ref && newly_revealed) {
      if (reference_blocked(known, *ref, st.theta)) ref_blocked_flag = true;
      newly_revealed = false;
    }

    const bool need_ref =
        !ref || ref_blocked_flag || (t - last_ref_time >= config.sim.reference_period - 1e-9);
    const bool control_due = ticks_since_high >= control_ticks;

    if (need_ref || control_due) {
      if (esdf_dirty) {
        plan_esdf = EsdfField::build(known);
        ++m.esdf_rebuilds;
        esdf_dirty = false;
      }
      if (need_ref) {
        const char* trigger = !ref ? "initial" : (ref_blocked_flag ? "collision" : "period");
        const auto t0 = std::chrono::steady_clock::now();
        auto poly = plan_guide(plan_esdf, st.position, goal, config.guide_clearance);
        if (!poly) {
          m.planning_failed = true;
          break;
        }
        poly->front() = st.position;
        GuidePath gp = resample(*poly, lcfg.ref_speed * lcfg.dt);
        std::vector<Vec3> guide = gp.points;
        if (static_cast<int>(guide.size()) > lcfg.horizon + 1)
          guide.resize(static_cast<std::size_t>(lcfg.horizon) + 1);
        const auto t1 = std::chrono::steady_clock::now();
        LowMpcResult low = solve_low_mpc(guide, plan_esdf, lcfg);
        m.low_solve_ms.push_back(ms_since(t1));
        out.log.events.push_back(
            {t, 'r', trigger, ms_since(t0), low.report.iterations, low.report.converged});
        ++m.reference_replans;
        ref = low.reference;
        st.theta = 0.0;
        const double curve_speed = ref->eval(0.0).velocity.norm();
        st.v_theta = std::clamp(speed / std::max(curve_speed, 0.5), hcfg.v_theta_bound.lo,
                                hcfg.v_theta_bound.hi);
        st.a_theta = 0.0;
        last_ref_time = t;
        ref_blocked_flag = false;
        warm_valid = false;
      }
      const auto t0 = std::chrono::steady_clock::now();
      MpccSolution sol = solve_high_mpcc(*ref, plan_esdf, st, hcfg,
                                         warm_valid ? prev_solution : VecX(),
                                         warm_valid ? shift_steps : 0);
      const double ms = ms_since(t0);
      m.high_solve_ms.push_back(ms);
      out.log.events.push_back({t, 'h', need_ref ? "reference" : "control", ms,
                                sol.report.iterations, sol.report.converged});
      ++m.control_replans;
      plan = sol.inputs;
      plan_base_tick = tick;
      prev_solution = sol.inputs;
      warm_valid = true;
      ticks_since_high = 0;

      // Plan-safety supervisor. The optimizer can converge to a local
      // minimum whose tail threads an obstacle; the receding horizon then
      // marches that segment toward the vehicle one period at a time.
      // Penetration far ahead forces a reroute; penetration inside the
      // braking window hands control to the emergency brake until a clean
      // plan appears.
      constexpr int kBrakeWindowSteps = 20;
      int pen_step = -1;
      Vec3 prev_state_pos = st.position;
      for (int i = 0; i < static_cast<int>(sol.states.size()); ++i) {
        const Vec3& p = sol.states[i].position;
        const Vec3 mid = 0.5 * (prev_state_pos + p);
        if ((known.in_bounds(p) && known.occupied(p)) ||
            (known.in_bounds(mid) && known.occupied(mid))) {
          pen_step = i;
          break;
        }
        prev_state_pos = p;
      }
      if (pen_step >= 0) {
        if (t - last_ref_time >= 0.2) ref_blocked_flag = true;
        braking = pen_step < kBrakeWindowSteps;
        if (braking) warm_valid = false;
      } else {
        braking = false;
      }
      if (plan_debug) {
        bool cl[3];
        double cmin = std::numeric_limits<double>::infinity();
        int carg = -1;
        for (int i = 0; i < static_cast<int>(sol.states.size()); ++i) {
          const double c =
              plan_esdf.query(plan_esdf.clamp_to_query_bounds(sol.states[i].position, cl)).value;
          if (c < cmin) { cmin = c; carg = i; }
        }
        const FullState& last = sol.states.back();
        double rmin = std::numeric_limits<double>::infinity();
        double rarg = 0.0;
        for (double th = 0.0; th <= ref->domain_end(); th += 0.02) {
          const Vec3 rp = ref->eval(th).position;
          const double c = plan_esdf.query(plan_esdf.clamp_to_query_bounds(rp, cl)).value;
          if (c < rmin) { rmin = c; rarg = th; }
        }
        std::fprintf(stderr,
                     "  plan t=%.2f th0=%.2f thN=%.2f end=%.2f cmin=%.3f@%d "
                     "refmin=%.3f@th=%.2f pN=(%.2f,%.2f) vN=%.2f\n",
                     t, st.theta, last.theta, ref->domain_end(), cmin, carg, rmin, rarg,
                     last.position.x(), last.position.y(), last.velocity.norm());
      }
    }

    if (braking) {
      // Two-stage clamp toward zero velocity on every axis, same shape as
      // the progress ramp in the cold start; respects the jerk and
      // acceleration bounds by construction.
      const double hdt = hcfg.dt;
      Vec3 jerk;
      for (int ax = 0; ax < 3; ++ax) {
        const double a_des = std::clamp(-st.velocity[ax] / (2.0 * hdt), hcfg.a_bound.lo,
                                        hcfg.a_bound.hi);
        jerk[ax] = std::clamp((a_des - st.acceleration[ax]) / hdt, hcfg.j_bound.lo,
                              hcfg.j_bound.hi);
      }
      const double a_des_th = std::clamp(-st.v_theta / (2.0 * hdt), hcfg.a_bound.lo,
                                         hcfg.a_bound.hi);
      const double jerk_th = std::clamp((a_des_th - st.a_theta) / hdt, hcfg.j_bound.lo,
                                        hcfg.j_bound.hi);
      integrate_tick(st, jerk, jerk_th, dt);
    } else {
      int k = (tick - plan_base_tick) / ticks_per_step;
      k = std::min(k, N - 1);
      const Vec3 jerk(plan[0 * N + k], plan[1 * N + k], plan[2 * N + k]);
      integrate_tick(st, jerk, plan[3 * N + k], dt);
    }
    ++ticks_since_high;
  }

  if (!m.success && !out.log.rows.empty()) m.flight_time = out.log.rows.back().t;
  if (m.gate_zone_samples > 0) {
    m.gate_zone_min_speed = gate_speed_min;
    m.gate_zone_mean_speed = gate_speed_sum / m.gate_zone_samples;
  }
  if (!std::isfinite(m.min_clearance)) m.min_clearance = 0.0;
  return out;
}

std::pair<EpisodeResult, EpisodeResult> ablate_easa(const Scenario& scenario,
                                                    const PlannerConfig& config) {
  EpisodeResult on = run_episode(scenario, config);
  PlannerConfig off_cfg = scenario.config ? *scenario.config : config;
  off_cfg.high_mpcc.lambda_adaptive = 0.0;
  Scenario off_scenario = scenario;
  off_scenario.config.reset();
  EpisodeResult off = run_episode(off_scenario, off_cfg);
  return {std::move(on), std::move(off)};
}

namespace {

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError(path + ": cannot open for writing");
    out << content;
    if (!out) throw ConfigError(path + ": write failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw ConfigError(path + ": atomic rename failed");
}

Json stats_json(const std::vector<double>& samples) {
  Json j;
  j["count"] = samples.size();
  if (samples.empty()) return j;
  std::vector<double> s = samples;
  std::sort(s.begin(), s.end());
  double sum = 0.0;
  for (double v : s) sum += v;
  const std::size_t n = s.size();
  const double median = (n % 2 == 1) ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
  j["mean"] = sum / static_cast<double>(n);
  j["median"] = median;
  j["max"] = s.back();
  return j;
}

}  // namespace

void write_flightlog_csv(const FlightLog& log, const std::string& path) {
  std::string content;
  content.reserve(64 * (log.rows.size() + 1));
  content += "t,x,y,z,vx,vy,vz,ax,ay,az,clearance,eta\n";
  char buf[512];
  for (const LogRow& r : log.rows) {
    std::snprintf(buf, sizeof(buf),
                  "%.6f,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", r.t,
                  r.p.x(), r.p.y(), r.p.z(), r.v.x(), r.v.y(), r.v.z(), r.a.x(), r.a.y(),
                  r.a.z(), r.clearance, r.eta);
    content += buf;
  }
  write_text_atomic(path, content);
}

std::string serialize_metrics(const Metrics& m) {
  Json j;
  j["schema_version"] = 1;
  j["success"] = m.success;
  j["collision"] = m.collision;
  j["timed_out"] = m.timed_out;
  j["planning_failed"] = m.planning_failed;
  j["flight_time"] = m.flight_time;
  j["path_length"] = m.path_length;
  j["min_clearance"] = m.min_clearance;
  j["max_speed"] = m.max_speed;
  j["final_goal_distance"] = m.final_goal_distance;
  j["replans"] = {{"reference", m.reference_replans},
                  {"control", m.control_replans},
                  {"esdf_rebuilds", m.esdf_rebuilds}};
  j["map_retries"] = m.map_retries;
  if (m.gate_zone_samples > 0) {
    j["gate"] = {{"zone_samples", m.gate_zone_samples},
                 {"zone_min_speed", m.gate_zone_min_speed},
                 {"zone_mean_speed", m.gate_zone_mean_speed},
                 {"open_max_speed", m.open_max_speed}};
  }
  return j.dump(2) + "\n";
}

void write_metrics_json(const Metrics& m, const std::string& path) {
  write_text_atomic(path, serialize_metrics(m));
}

std::string serialize_timings(const Metrics& m) {
  Json j;
  j["schema_version"] = 1;
  j["low_solve_ms"] = stats_json(m.low_solve_ms);
  j["high_solve_ms"] = stats_json(m.high_solve_ms);
  return j.dump(2) + "\n";
}

void write_timings_json(const Metrics& m, const std::string& path) {
  write_text_atomic(path, serialize_timings(m));
}

}  // namespace ampcc
