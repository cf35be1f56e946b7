#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "ampcc/config.hpp"
#include "ampcc/sim.hpp"

using namespace ampcc;

namespace {

Scenario empty_scenario() {
  return parse_scenario(R"({
    "schema_version": 1,
    "name": "straightline",
    "map": {"generator": "forest", "seed": 1, "density": 0.0},
    "start": [1.0, 0.0, 1.0],
    "goal": [21.0, 0.0, 1.0],
    "sensing": {"mode": "full"}
  })",
                        "test");
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("scenario parsing") {
  const Scenario s = parse_scenario(R"({
    "schema_version": 1,
    "name": "demo",
    "map": {"generator": "gate", "seed": 9, "opening": 0.9, "hidden_obstacle": true},
    "start": [1.0, 2.0, 3.0],
    "sensing": {"mode": "range", "radius": 2.5},
    "limits": {"v_max": 2.0}
  })",
                                    "test");
  CHECK(s.name == "demo");
  CHECK(s.map.generator == "gate");
  CHECK(s.map.seed == 9);
  CHECK(s.map.opening == 0.9);
  CHECK(s.map.hidden_obstacle);
  REQUIRE(s.start.has_value());
  CHECK(*s.start == Vec3(1.0, 2.0, 3.0));
  CHECK(!s.goal.has_value());
  CHECK(s.sensing.mode == SensingSpec::Mode::kRange);
  REQUIRE(s.sensing.radius.has_value());
  CHECK(*s.sensing.radius == 2.5);
  REQUIRE(s.v_max.has_value());
  CHECK(*s.v_max == 2.0);
  CHECK(!s.a_max.has_value());

  CHECK_THROWS_AS(parse_scenario(R"({"schema_version": 1})", "test"), ConfigError);
  CHECK_THROWS_AS(parse_scenario(
                      R"({"schema_version": 1, "map": {"generator": "gate"}, "pilot": 1})",
                      "test"),
                  ConfigError);
  CHECK_THROWS_AS(parse_scenario(
                      R"({"schema_version": 1, "map": {"generator": "gate"},
                          "sensing": {"mode": "lidar"}})",
                      "test"),
                  ConfigError);
  CHECK_THROWS_AS(parse_scenario(
                      R"({"schema_version": 1, "map": {"generator": "gate", "seed": -4}})",
                      "test"),
                  ConfigError);
  CHECK_THROWS_AS(parse_scenario(
                      R"({"schema_version": 1, "map": {"generator": "gate"},
                          "config": {"schema_version": 2}})",
                      "test"),
                  ConfigError);
}

TEST_CASE("a straight flight through empty space hits its oracle band") {
  const Scenario scenario = empty_scenario();
  const PlannerConfig config = default_planner_config();
  const EpisodeResult ep = run_episode(scenario, config);

  CHECK(ep.metrics.success);
  CHECK(!ep.metrics.collision);
  CHECK(!ep.metrics.timed_out);
  CHECK(!ep.metrics.planning_failed);
  CHECK(ep.metrics.final_goal_distance <= config.sim.goal_tolerance);

  // 20 m at a 3 m/s per-axis cap (plus the tolerated overshoot): the flight
  // cannot beat the kinematic floor, and a working planner does not need
  // more than a few seconds of slack over it.
  CHECK(ep.metrics.flight_time >= 19.6 / 3.2);
  CHECK(ep.metrics.flight_time <= 20.0 / 3.0 + 3.5);
  CHECK(ep.metrics.max_speed >= 2.9);
  CHECK(ep.metrics.max_speed <= 3.2);
  CHECK(ep.metrics.path_length >= 19.6 - 0.05);
  CHECK(ep.metrics.path_length <= 22.0);
  CHECK(ep.metrics.min_clearance > 10.0);  // nothing anywhere near
  CHECK(ep.metrics.reference_replans >= 1);
  CHECK(ep.metrics.control_replans >= 10);

  SUBCASE("the log respects the physics invariants") {
    REQUIRE(ep.log.rows.size() > 100);
    const double dt = config.sim.dt;
    for (std::size_t i = 1; i < ep.log.rows.size(); ++i) {
      const LogRow& a = ep.log.rows[i - 1];
      const LogRow& b = ep.log.rows[i];
      CHECK(b.t > a.t);
      CHECK(std::abs(b.t - a.t - dt) < 1e-6);
      for (int ax = 0; ax < 3; ++ax) {
        // One tick of triple-integrator motion at the tolerated extremes.
        CHECK(std::abs(b.p[ax] - a.p[ax]) <= 3.1 * dt + 6.5 * dt * dt / 2.0 + 1e-6);
        CHECK(std::abs(b.v[ax] - a.v[ax]) <= 6.5 * dt + 30.0 * dt * dt / 2.0 + 1e-9);
        CHECK(std::abs(b.v[ax]) <= 3.0 + 0.1);
        CHECK(std::abs(b.a[ax]) <= 6.0 + 0.5);
      }
    }
  }

  SUBCASE("far from obstacles the risk weight is neutral") {
    for (const LogRow& r : ep.log.rows) CHECK(std::abs(r.eta - 1.0) <= 1e-12);
  }

  SUBCASE("events carry the replan taxonomy") {
    REQUIRE(!ep.log.events.empty());
    CHECK(ep.log.events.front().trigger == "initial");
    bool saw_ref = false, saw_high = false;
    for (const ReplanEvent& e : ep.log.events) {
      CHECK((e.layer == 'r' || e.layer == 'h'));
      saw_ref |= e.layer == 'r';
      saw_high |= e.layer == 'h';
      CHECK(e.solve_ms >= 0.0);
    }
    CHECK(saw_ref);
    CHECK(saw_high);
  }
}

TEST_CASE("speed limits from the scenario bind the executed flight") {
  Scenario scenario = parse_scenario(R"({
    "schema_version": 1,
    "name": "slow",
    "map": {"generator": "forest", "seed": 1, "density": 0.0},
    "start": [1.0, 0.0, 1.0],
    "goal": [15.0, 0.0, 1.0],
    "limits": {"v_max": 1.5}
  })",
                                     "test");
  const EpisodeResult ep = run_episode(scenario, default_planner_config());
  CHECK(ep.metrics.success);
  CHECK(ep.metrics.max_speed <= 1.65);
  CHECK(ep.metrics.flight_time >= (14.0 - 0.4) / 1.7);
}

TEST_CASE("episodes are bit-reproducible") {
  const Scenario scenario = empty_scenario();
  const PlannerConfig config = default_planner_config();
  const EpisodeResult a = run_episode(scenario, config);
  const EpisodeResult b = run_episode(scenario, config);

  CHECK(serialize_metrics(a.metrics) == serialize_metrics(b.metrics));
  CHECK(serialize_timings(a.metrics) != "");  // timings exist but are separate

  const std::string pa = "det_a.csv", pb = "det_b.csv";
  write_flightlog_csv(a.log, pa);
  write_flightlog_csv(b.log, pb);
  CHECK(slurp(pa) == slurp(pb));
  std::remove(pa.c_str());
  std::remove(pb.c_str());
}

TEST_CASE("metrics json is layout-stable and free of wall-clock noise") {
  const Scenario scenario = empty_scenario();
  const EpisodeResult ep = run_episode(scenario, default_planner_config());
  const std::string text = serialize_metrics(ep.metrics);
  CHECK(text.find("\"schema_version\"") != std::string::npos);
  CHECK(text.find("\"success\"") != std::string::npos);
  CHECK(text.find("\"replans\"") != std::string::npos);
  CHECK(text.find("solve_ms") == std::string::npos);
  CHECK(text.find("wall") == std::string::npos);
  // No gate zone on a forest map.
  CHECK(text.find("\"gate\"") == std::string::npos);

  const std::string timings = serialize_timings(ep.metrics);
  CHECK(timings.find("\"low_solve_ms\"") != std::string::npos);
  CHECK(timings.find("\"high_solve_ms\"") != std::string::npos);
  CHECK(timings.find("\"median\"") != std::string::npos);
}

TEST_CASE("flightlog csv starts with the exact header") {
  const Scenario scenario = empty_scenario();
  const EpisodeResult ep = run_episode(scenario, default_planner_config());
  const std::string path = "header_check.csv";
  write_flightlog_csv(ep.log, path);
  const std::string text = slurp(path);
  CHECK(text.rfind("t,x,y,z,vx,vy,vz,ax,ay,az,clearance,eta\n", 0) == 0);
  // One row per simulation tick plus the header.
  std::size_t lines = 0;
  for (char c : text) lines += c == '\n';
  CHECK(lines == ep.log.rows.size() + 1);
  std::remove(path.c_str());
}

TEST_CASE("a hidden obstacle forces esdf rebuilds under range sensing") {
  const Scenario scenario = parse_scenario(R"({
    "schema_version": 1,
    "name": "sudden",
    "map": {"generator": "gate", "seed": 11, "opening": 0.8, "hidden_obstacle": true},
    "sensing": {"mode": "range", "radius": 2.5}
  })",
                                           "test");
  const EpisodeResult ep = run_episode(scenario, default_planner_config());
  CHECK(ep.metrics.success);
  CHECK(ep.metrics.esdf_rebuilds >= 1);
  CHECK(ep.metrics.gate_zone_samples > 0);
  CHECK(ep.metrics.min_clearance > 0.0);
}

TEST_CASE("disabling the adaptive term lets the gate crossing stay fast") {
  const Scenario scenario = parse_scenario(R"({
    "schema_version": 1,
    "name": "sudden-ablation",
    "map": {"generator": "gate", "seed": 11, "opening": 0.8, "hidden_obstacle": true},
    "sensing": {"mode": "range", "radius": 2.5}
  })",
                                           "test");
  const auto [on, off] = ablate_easa(scenario, default_planner_config());
  CHECK(on.metrics.success);
  CHECK(off.metrics.success);
  REQUIRE(on.metrics.gate_zone_samples > 0);
  REQUIRE(off.metrics.gate_zone_samples > 0);
  CHECK(on.metrics.gate_zone_mean_speed < off.metrics.gate_zone_mean_speed);
}
