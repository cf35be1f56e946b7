#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "ampcc/config.hpp"
#include "ampcc/gradient_suite.hpp"
#include "ampcc/sim.hpp"
#include "ampcc/types.hpp"

namespace fs = std::filesystem;
using namespace ampcc;

namespace {

int log_level() {
  const char* env = std::getenv("AMPCC_LOG");
  if (!env) return 1;
  return std::atoi(env);
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError(path + ": cannot open for writing");
    out << content;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw ConfigError(path + ": atomic rename failed");
}

template <typename Fn>
void parallel_for(int count, Fn&& fn) {
  const int workers =
      std::max(1, std::min<int>(static_cast<int>(std::thread::hardware_concurrency()), count));
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
    });
  for (std::thread& th : pool) th.join();
}

std::string format_num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

const char* status_of(const Metrics& m) {
  if (m.success) return "success";
  if (m.collision) return "collision";
  if (m.timed_out) return "timeout";
  if (m.planning_failed) return "planning_failed";
  return "incomplete";
}

PlannerConfig load_config_or_default(const std::string& path) {
  return path.empty() ? default_planner_config() : load_planner_config(path);
}

void write_episode(const EpisodeResult& r, const fs::path& dir, const std::string& suffix) {
  write_flightlog_csv(r.log, (dir / ("flightlog" + suffix + ".csv")).string());
  write_metrics_json(r.metrics, (dir / ("metrics" + suffix + ".json")).string());
  write_timings_json(r.metrics, (dir / ("timings" + suffix + ".json")).string());
}

void print_summary(const Metrics& m, const std::string& label) {
  if (log_level() < 1) return;
  std::printf("%s: %s  flight_time=%.2fs  path=%.2fm  min_clearance=%.3fm  max_speed=%.2fm/s\n",
              label.c_str(), status_of(m), m.flight_time, m.path_length, m.min_clearance,
              m.max_speed);
}

int cmd_run(const std::string& config_path, const std::string& scenario_path,
            const std::string& out_dir, std::optional<std::uint64_t> seed, bool ablate) {
  const PlannerConfig config = load_config_or_default(config_path);
  Scenario scenario = load_scenario(scenario_path);
  if (seed) scenario.map.seed = *seed;
  fs::create_directories(out_dir);

  if (ablate) {
    auto [on, off] = ablate_easa(scenario, config);
    write_episode(on, out_dir, "_on");
    write_episode(off, out_dir, "_off");
    print_summary(on.metrics, scenario.name + " [adaptive on]");
    print_summary(off.metrics, scenario.name + " [adaptive off]");
    return on.metrics.success ? 0 : 1;
  }
  const EpisodeResult r = run_episode(scenario, config);
  write_episode(r, out_dir, "");
  print_summary(r.metrics, scenario.name);
  if (log_level() >= 2) {
    for (const ReplanEvent& e : r.log.events)
      std::fprintf(stderr, "  t=%.2f %c %-9s solve=%.2fms iters=%d%s\n", e.t, e.layer,
                   e.trigger.c_str(), e.solve_ms, e.iterations, e.converged ? "" : " (!)");
  }
  return r.metrics.success ? 0 : 1;
}

struct SweepSpec {
  std::string param;
  std::vector<double> values;
};

SweepSpec parse_sweep(const std::string& text) {
  const std::size_t eq = text.find('=');
  if (eq == std::string::npos)
    throw ConfigError("--sweep expects <param>=<v1,v2,...>, got '" + text + "'");
  SweepSpec spec;
  spec.param = text.substr(0, eq);
  if (spec.param != "density" && spec.param != "alpha")
    throw ConfigError("--sweep parameter must be 'density' or 'alpha', got '" + spec.param +
                      "'");
  std::string rest = text.substr(eq + 1);
  std::size_t pos = 0;
  while (pos < rest.size()) {
    std::size_t comma = rest.find(',', pos);
    if (comma == std::string::npos) comma = rest.size();
    const std::string tok = rest.substr(pos, comma - pos);
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      spec.values.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("--sweep value '" + tok + "' is not a number");
    }
    pos = comma + 1;
  }
  if (spec.values.empty()) throw ConfigError("--sweep needs at least one value");
  return spec;
}

int cmd_sweep(const std::string& config_path, const std::string& scenario_path,
              const std::string& out_dir, const std::string& sweep_text,
              std::uint64_t base_seed, int trials) {
  if (trials < 1) throw ConfigError("--trials must be >= 1");
  const SweepSpec spec = parse_sweep(sweep_text);
  const PlannerConfig config = load_config_or_default(config_path);
  const Scenario scenario = load_scenario(scenario_path);
  fs::create_directories(out_dir);

  struct Cell {
    double value = 0.0;
    std::uint64_t seed = 0;
    Metrics metrics;
    std::string error;
  };
  std::vector<Cell> cells;
  for (double v : spec.values)
    for (int s = 0; s < trials; ++s) cells.push_back({v, base_seed + s, {}, {}});

  std::atomic<bool> any_error{false};
  parallel_for(static_cast<int>(cells.size()), [&](int i) {
    Cell& cell = cells[i];
    Scenario scn = scenario;
    PlannerConfig cfg = config;
    scn.map.seed = cell.seed;
    if (spec.param == "density") {
      scn.map.density = cell.value;
    } else {
      cfg.easa.alpha = cell.value;
      cfg.high_mpcc.easa.alpha = cell.value;
      if (scn.config) {
        scn.config->easa.alpha = cell.value;
        scn.config->high_mpcc.easa.alpha = cell.value;
      }
    }
    try {
      const EpisodeResult r = run_episode(scn, cfg);
      cell.metrics = r.metrics;
      char name[128];
      std::snprintf(name, sizeof(name), "%s_%g_seed_%llu.metrics.json", spec.param.c_str(),
                    cell.value, static_cast<unsigned long long>(cell.seed));
      write_metrics_json(r.metrics, (fs::path(out_dir) / name).string());
    } catch (const std::exception& e) {
      cell.error = e.what();
      any_error = true;
    }
  });

  std::string table = "param,value,seed,status,flight_time,path_length,min_clearance,"
                      "max_speed,gate_zone_min_speed,gate_zone_mean_speed\n";
  for (const Cell& cell : cells) {
    table += spec.param + "," + format_num(cell.value) + "," + std::to_string(cell.seed) + ",";
    if (!cell.error.empty()) {
      table += "error,nan,nan,nan,nan,nan,nan\n";
      continue;
    }
    const Metrics& m = cell.metrics;
    table += std::string(status_of(m)) + "," + format_num(m.flight_time) + "," +
             format_num(m.path_length) + "," + format_num(m.min_clearance) + "," +
             format_num(m.max_speed) + "," + format_num(m.gate_zone_min_speed) + "," +
             format_num(m.gate_zone_mean_speed) + "\n";
  }
  write_text_atomic((fs::path(out_dir) / "sweep.csv").string(), table);

  std::string medians = "param,value,episodes,successes,median_flight_time,"
                        "median_gate_zone_min_speed\n";
  for (double v : spec.values) {
    std::vector<double> times, gate_speeds;
    int successes = 0;
    for (const Cell& cell : cells) {
      if (cell.value != v || !cell.error.empty()) continue;
      if (cell.metrics.success) {
        ++successes;
        times.push_back(cell.metrics.flight_time);
        if (cell.metrics.gate_zone_samples > 0)
          gate_speeds.push_back(cell.metrics.gate_zone_min_speed);
      }
    }
    auto median = [](std::vector<double>& xs) {
      if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
      std::sort(xs.begin(), xs.end());
      const std::size_t n = xs.size();
      return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
    };
    medians += spec.param + "," + format_num(v) + "," + std::to_string(trials) + "," +
               std::to_string(successes) + "," + format_num(median(times)) + "," +
               format_num(median(gate_speeds)) + "\n";
  }
  write_text_atomic((fs::path(out_dir) / "medians.csv").string(), medians);
  if (log_level() >= 1) {
    std::fputs(medians.c_str(), stdout);
    for (const Cell& cell : cells)
      if (!cell.error.empty())
        std::fprintf(stderr, "cell %s=%g seed=%llu failed: %s\n", spec.param.c_str(),
                     cell.value, static_cast<unsigned long long>(cell.seed),
                     cell.error.c_str());
  }
  return any_error ? 1 : 0;
}

int cmd_check_gradients(const std::string& config_path, int trials, std::uint64_t seed,
                        bool inject_fault) {
  const PlannerConfig config = load_config_or_default(config_path);
  GradientSuiteOptions options;
  options.trials = trials;
  options.seed = seed;
  options.inject_sign_flip = inject_fault;
  const GradientSuiteResult result = run_gradient_suite(config, options);
  std::printf("%-4s  %-14s  %-14s\n", "term", "cluttered", "open");
  for (const TermReport& t : result.terms)
    std::printf("%-4s  %-14.3e  %-14.3e\n", t.term.c_str(), t.cluttered_error, t.open_error);
  const double worst = std::max(result.worst_cluttered, result.worst_open);
  std::printf("worst relative error: %.3e (gate 1e-3)\n", worst);
  return worst > 1e-3 ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ampcc: adaptive MPCC trajectory planner"};
  app.require_subcommand(1);

  std::string config_path, scenario_path, out_dir = ".", sweep_text;
  std::uint64_t seed = 1;
  int trials = 0;
  bool ablate = false, inject_fault = false;

  CLI::App* run = app.add_subcommand("run", "Run one closed-loop episode");
  run->add_option("--config", config_path, "Planner config file");
  run->add_option("--scenario", scenario_path, "Scenario file")->required();
  run->add_option("--out", out_dir, "Output directory");
  CLI::Option* run_seed = run->add_option("--seed", seed, "Override the scenario map seed");
  run->add_flag("--ablate-easa", ablate, "Also run with the adaptive term disabled");

  CLI::App* sweep = app.add_subcommand("sweep", "Run a parameter/seed grid");
  sweep->add_option("--config", config_path, "Planner config file");
  sweep->add_option("--scenario", scenario_path, "Scenario file")->required();
  sweep->add_option("--out", out_dir, "Output directory");
  sweep->add_option("--sweep", sweep_text, "Grid spec: <param>=<v1,v2,...>")->required();
  sweep->add_option("--seed", seed, "Base seed (cells use seed..seed+trials-1)");
  sweep->add_option("--trials", trials, "Seeds per value")->default_val(20);

  CLI::App* check = app.add_subcommand("check-gradients", "Validate analytic gradients");
  check->add_option("--config", config_path, "Planner config file");
  check->add_option("--trials", trials, "Random states per term")->default_val(50);
  check->add_option("--seed", seed, "Random seed");
  check->add_flag("--inject-gradient-fault", inject_fault,
                  "Corrupt one gradient term to exercise the detector")
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed()) {
      std::optional<std::uint64_t> seed_opt;
      if (run_seed->count() > 0) seed_opt = seed;
      return cmd_run(config_path, scenario_path, out_dir, seed_opt, ablate);
    }
    if (sweep->parsed())
      return cmd_sweep(config_path, scenario_path, out_dir, sweep_text, seed, trials);
    if (check->parsed()) {
      if (trials < 1) {
        std::fprintf(stderr, "error: --trials must be >= 1\n");
        return 2;
      }
      return cmd_check_gradients(config_path, trials, seed, inject_fault);
    }
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ContractError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
