// Command-line front end: single rollouts, the four-method comparison, the
// GA parameter search, and a summary of previously written trajectories.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "ffsr/config.hpp"
#include "ffsr/genetic.hpp"
#include "ffsr/report.hpp"
#include "ffsr/simulation.hpp"

namespace fs = std::filesystem;
using namespace ffsr;

namespace {

enum Exit { kOk = 0, kFailure = 1, kConfig = 2, kSimulation = 3 };

struct Options {
  std::string scenario;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  std::optional<double> dt;
  std::string method;
  std::string ga;
  std::optional<std::size_t> population, generations;
  std::optional<unsigned> threads;
};

std::mutex console;

void say(const std::string& s) {
  std::lock_guard lock(console);
  std::cout << s << std::flush;
}

ScenarioConfig load(const Options& o) {
  ScenarioConfig cfg = load_config(o.scenario);
  if (o.dt) {
    if (!(*o.dt > 0.0)) throw ConfigError("--dt", 0, "must be positive");
    cfg.scenario.dt = *o.dt;
  }
  if (!o.method.empty()) {
    try {
      cfg.scenario.method = parse_method(o.method);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("--method", 0, e.what());
    }
  }
  if (!o.ga.empty()) cfg.optimize = load_optimize_settings(o.ga, cfg.optimize);
  GaConfig& ga = cfg.optimize.ga;
  if (o.seed) ga.seed = *o.seed;
  if (o.population) ga.population = *o.population;
  if (o.generations) ga.generations = *o.generations;
  if (o.threads) ga.threads = *o.threads;
  try {
    ga.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError("ga", 0, e.what());
  }
  if (cfg.scenario.total_time < cfg.scenario.planner.T_c)
    std::cerr << "warning: total_time is shorter than T_c\n";
  return cfg;
}

MetricsRow row_of(const std::string& label, const Scenario& sc, const Metrics& m) {
  return MetricsRow{label, sc.planner.m, sc.planner.T_c, m};
}

int cmd_run(const Options& o) {
  const ScenarioConfig cfg = load(o);
  const Scenario& sc = cfg.scenario;
  fs::create_directories(o.out);
  const RunResult r = run(sc);
  write_trajectory_csv(fs::path(o.out) / "trajectory.csv", r.log);
  const MetricsRow row = row_of(method_name(sc.method), sc, r.metrics);
  write_metrics_json(fs::path(o.out) / "metrics.json", row);
  const std::string table = format_metrics_table({row});
  std::ofstream(fs::path(o.out) / "metrics.txt") << table;
  write_run_plot_script(fs::path(o.out) / "plot_run.py", "trajectory.csv");
  say(table);
  return kOk;
}

int cmd_compare(const Options& o) {
  const ScenarioConfig cfg = load(o);
  fs::create_directories(o.out);
  constexpr std::size_t n = std::size(kAllMethods);
  std::array<RunResult, n> results;
  std::array<std::string, n> errors;
  {
    std::vector<std::jthread> workers;
    for (std::size_t i = 0; i < n; ++i)
      workers.emplace_back([&, i] {
        Scenario sc = cfg.scenario;
        sc.method = kAllMethods[i];
        try {
          results[i] = run(sc);
        } catch (const std::exception& e) {
          errors[i] = e.what();
        }
        say(std::string("  finished ") + method_name(sc.method) + "\n");
      });
  }
  std::vector<MetricsRow> rows;
  std::vector<std::string> files, labels;
  for (std::size_t i = 0; i < n; ++i) {
    const std::string name = method_name(kAllMethods[i]);
    if (!errors[i].empty()) throw SimulationError(name + ": " + errors[i], 0.0);
    const std::string file = "trajectory_" + name + ".csv";
    write_trajectory_csv(fs::path(o.out) / file, results[i].log);
    Scenario sc = cfg.scenario;
    sc.method = kAllMethods[i];
    rows.push_back(row_of(name, sc, results[i].metrics));
    files.push_back(file);
    labels.push_back(name);
  }
  write_metrics_csv(fs::path(o.out) / "comparison.csv", rows);
  write_joint_speed_csv(fs::path(o.out) / "joint_speeds.csv", rows);
  const std::string table = format_metrics_table(rows);
  std::ofstream(fs::path(o.out) / "comparison.txt") << table;
  write_compare_plot_script(fs::path(o.out) / "plot_compare.py", files, labels);
  say(table);
  return kOk;
}

int cmd_optimize(const Options& o) {
  const ScenarioConfig cfg = load(o);
  const GaConfig& ga = cfg.optimize.ga;
  fs::create_directories(o.out);

  const Evaluator base_eval = scenario_evaluator(cfg.scenario, ga);
  std::atomic<std::size_t> done{0};
  const Evaluator eval = [&](const Chromosome& c) {
    TrajectoryLog log = base_eval(c);
    if (++done % 10 == 0) say("  " + std::to_string(done.load()) + " rollouts\n");
    return log;
  };
  const GaReport report = run_ga(ga, eval);
  write_ga_report_csv(fs::path(o.out) / "ga_report.csv", report);
  {
    std::ofstream pop(fs::path(o.out) / "ga_final_population.csv", std::ios::binary);
    pop << "m,T_c,B,F\n";
    char buf[128];
    for (const Chromosome& c : report.final_population) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", c.m, c.T_c, c.B, c.F);
      pop << buf;
    }
  }

  Scenario best = cfg.scenario;
  best.method = Method::predefined_time;
  best.planner.m = report.best.m;
  best.planner.T_c = report.best.T_c;
  Scenario baseline = best;
  baseline.planner.m = cfg.optimize.baseline_m;
  baseline.planner.T_c = cfg.optimize.baseline_Tc.value_or(report.best.T_c);

  RunResult rb, r0;
  {
    std::jthread a([&] { rb = run(best); });
    std::jthread b([&] { r0 = run(baseline); });
  }
  write_trajectory_csv(fs::path(o.out) / "trajectory_optimized.csv", rb.log);
  write_trajectory_csv(fs::path(o.out) / "trajectory_baseline.csv", r0.log);
  const std::vector<MetricsRow> rows{row_of("baseline", baseline, r0.metrics),
                                     row_of("optimized", best, rb.metrics)};
  write_metrics_csv(fs::path(o.out) / "speed_comparison.csv", rows);
  write_joint_speed_csv(fs::path(o.out) / "joint_speeds.csv", rows);
  write_optimize_plot_script(fs::path(o.out) / "plot_optimize.py", "ga_report.csv",
                             "trajectory_optimized.csv", "trajectory_baseline.csv");

  std::string summary = format_metrics_table(rows);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "best m = %.6f, T_c = %.6f s, B = %.6g, F = %.6f\n"
                "rollouts %zu, cache hits %zu%s\n",
                report.best.m, report.best.T_c, report.best.B, report.best.F, report.evaluations,
                report.cache_hits, report.degenerate ? ", fitness was flat" : "");
  summary += buf;
  for (const std::string& e : report.events) summary += "event: " + e + "\n";
  std::ofstream(fs::path(o.out) / "optimize.txt") << summary;
  say(summary);
  return kOk;
}

// Summarizes every trajectory CSV already present in the output directory.
int cmd_report(const Options& o) {
  if (!fs::is_directory(o.out)) throw std::runtime_error("no such directory: " + o.out);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(o.out))
    if (entry.path().extension() == ".csv" && entry.path().filename().string().starts_with("trajectory"))
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("no trajectory CSV files in " + o.out);

  std::string text;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-32s %8s %12s %10s %10s %10s %10s\n", "file", "rows",
                "final|e1|", "settle[s]", "dmin[m]", "arm1[d/s]", "arm2[d/s]");
  text += buf;
  for (const fs::path& p : files) {
    const CsvTable t = read_csv(p);
    if (t.header != trajectory_columns()) continue;
    const std::size_t it = t.column("t"), ie = t.column("e1_norm"), id = t.column("dmin");
    double dmin = std::numeric_limits<double>::infinity(), s1 = 0.0, s2 = 0.0;
    std::vector<double> times, err;
    for (const auto& row : t.rows) {
      dmin = std::min(dmin, row[id]);
      for (int j = 1; j <= kArmJoints; ++j) {
        s1 = std::max(s1, std::abs(row[t.column("dth1_" + std::to_string(j))]));
        s2 = std::max(s2, std::abs(row[t.column("dth2_" + std::to_string(j))]));
      }
      times.push_back(row[it]);
      err.push_back(row[ie]);
    }
    const auto settle = settling_time(times, err, 1e-6);
    char st[32];
    if (settle)
      std::snprintf(st, sizeof st, "%.3f", *settle);
    else
      std::snprintf(st, sizeof st, "never");
    std::snprintf(buf, sizeof buf, "%-32s %8zu %12.3e %10s %10.4f %10.2f %10.2f\n",
                  p.filename().string().c_str(), t.rows.size(), err.empty() ? 0.0 : err.back(), st,
                  dmin, s1 * kDegPerRad, s2 * kDegPerRad);
    text += buf;
  }
  std::ofstream(fs::path(o.out) / "report.txt") << text;
  say(text);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Trajectory planning for a dual-arm free-floating space robot"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub, bool scenario) {
    if (scenario) sub->add_option("--scenario", o.scenario, "scenario YAML file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
    sub->add_option("--dt", o.dt, "integration step [s], overrides the scenario");
  };

  CLI::App* run_cmd = app.add_subcommand("run", "single rollout");
  add_common(run_cmd, true);
  run_cmd->add_option("--method", o.method,
                      "no_avoidance, no_feedback, proportional or predefined_time");

  CLI::App* compare = app.add_subcommand("compare", "all four methods on one scenario");
  add_common(compare, true);

  CLI::App* optimize = app.add_subcommand("optimize", "GA search over (m, T_c)");
  add_common(optimize, true);
  optimize->add_option("--seed", o.seed, "GA seed, overrides the config");
  optimize->add_option("--ga", o.ga, "YAML file holding a ga: section")->check(CLI::ExistingFile);
  optimize->add_option("--population", o.population, "population size S_max");
  optimize->add_option("--generations", o.generations, "generation count G");
  optimize->add_option("--threads", o.threads, "fitness worker threads (0: all cores)");

  CLI::App* report = app.add_subcommand("report", "summarize trajectory CSVs in --out");
  report->add_option("--out", o.out, "directory written by run, compare or optimize")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return cmd_run(o);
    if (compare->parsed()) return cmd_compare(o);
    if (optimize->parsed()) return cmd_optimize(o);
    if (report->parsed()) return cmd_report(o);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const SimulationError& e) {
    std::cerr << "simulation error at t = " << e.time << " s: " << e.what() << '\n';
    return kSimulation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}
