#include "ffsr/report.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ffsr {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void write_row(std::ostream& out, const std::vector<double>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << num(row[i]);
  out << '\n';
}

double opt_or_nan(const std::optional<double>& v) {
  return v ? *v : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

const std::vector<std::string>& trajectory_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c{"t"};
    for (const char* group : {"th1_", "th2_", "dth1_", "dth2_"})
      for (int j = 1; j <= kArmJoints; ++j) c.push_back(group + std::to_string(j));
    for (const char* name : {"bx", "by", "bz", "bqw", "bqx", "bqy", "bqz", "ex", "ey", "ez", "eqw",
                             "eqx", "eqy", "eqz", "e1_norm", "e0p_norm", "dmin", "mom_res"})
      c.emplace_back(name);
    return c;
  }();
  return cols;
}

std::vector<double> trajectory_row(const LogRecord& r) {
  std::vector<double> row;
  row.reserve(trajectory_columns().size());
  row.push_back(r.t);
  for (const Vector6d* v : {&r.theta1, &r.theta2, &r.theta_dot1, &r.theta_dot2})
    row.insert(row.end(), v->data(), v->data() + kArmJoints);
  for (const Posed* p : {&r.base, &r.end_effector}) {
    row.insert(row.end(), p->position.data(), p->position.data() + 3);
    const Eigen::Vector4d q = p->attitude.coeffs_wxyz();
    row.insert(row.end(), q.data(), q.data() + 4);
  }
  row.push_back(r.e1.norm());
  row.push_back(r.e0.e_p.norm());
  row.push_back(r.dmin);
  row.push_back(r.momentum_residual);
  return row;
}

void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log) {
  const auto& cols = trajectory_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const LogRecord& r : log.records) write_row(out, trajectory_row(r));
}

void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryLog& log) {
  auto out = open_out(path);
  write_trajectory_csv(out, log);
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw std::out_of_range("csv: no column '" + name + "'");
}

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty input");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.header.push_back(cell);
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0')
        throw std::runtime_error("csv line " + std::to_string(lineno) + ": bad number '" + cell +
                                 "'");
      row.push_back(v);
    }
    if (row.size() != t.header.size())
      throw std::runtime_error("csv line " + std::to_string(lineno) + ": expected " +
                               std::to_string(t.header.size()) + " fields");
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return read_csv(in);
}

void write_ga_report_csv(std::ostream& out, const GaReport& report) {
  out << "generation,best_F,avg_F,best_m,best_Tc\n";
  for (const GenerationStats& g : report.generations)
    write_row(out, {static_cast<double>(g.generation), g.best_F, g.avg_F, g.best_m, g.best_Tc});
}

void write_ga_report_csv(const std::filesystem::path& path, const GaReport& report) {
  auto out = open_out(path);
  write_ga_report_csv(out, report);
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows) {
  auto out = open_out(path);
  out << "label,m,T_c_s,final_position_error_m,final_pose_error,settling_time_s,"
         "base_settling_time_s,min_distance_m,max_speed_arm1_deg_s,max_speed_arm2_deg_s,"
         "base_position_error_peak_m,base_attitude_error_peak,max_momentum_residual\n";
  for (const MetricsRow& r : rows) {
    const Metrics& m = r.metrics;
    out << r.label << ',';
    write_row(out, {r.m, r.T_c, m.final_position_error, m.final_pose_error,
                    opt_or_nan(m.settling_time), opt_or_nan(m.base_settling_time),
                    m.min_obstacle_distance, m.max_joint_speed[0].maxCoeff() * kDegPerRad,
                    m.max_joint_speed[1].maxCoeff() * kDegPerRad, m.base_position_error_peak,
                    m.base_attitude_error_peak, m.max_momentum_residual});
  }
}

void write_joint_speed_csv(const std::filesystem::path& path,
                           const std::vector<MetricsRow>& rows) {
  auto out = open_out(path);
  out << "label,arm,joint,max_speed_deg_s\n";
  for (const MetricsRow& r : rows)
    for (int arm = 0; arm < 2; ++arm)
      for (int j = 0; j < kArmJoints; ++j)
        out << r.label << ',' << arm + 1 << ',' << j + 1 << ','
            << num(r.metrics.max_joint_speed[arm](j) * kDegPerRad) << '\n';
}

std::string format_metrics_table(const std::vector<MetricsRow>& rows) {
  std::string s;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-16s %7s %6s %12s %9s %9s %9s %10s %10s %10s\n", "method", "m",
                "T_c[s]", "final|ep|[m]", "settle[s]", "bsettle", "dmin[m]", "arm1[d/s]",
                "arm2[d/s]", "mom_res");
  s += buf;
  auto settle = [](const std::optional<double>& t) {
    char b[32];
    if (t)
      std::snprintf(b, sizeof b, "%.3f", *t);
    else
      std::snprintf(b, sizeof b, "never");
    return std::string(b);
  };
  for (const MetricsRow& r : rows) {
    const Metrics& m = r.metrics;
    std::snprintf(buf, sizeof buf, "%-16s %7.4f %6.3f %12.3e %9s %9s %9.4f %10.2f %10.2f %10.1e\n",
                  r.label.c_str(), r.m, r.T_c, m.final_position_error,
                  settle(m.settling_time).c_str(), settle(m.base_settling_time).c_str(),
                  m.min_obstacle_distance, m.max_joint_speed[0].maxCoeff() * kDegPerRad,
                  m.max_joint_speed[1].maxCoeff() * kDegPerRad, m.max_momentum_residual);
    s += buf;
  }
  return s;
}

void write_metrics_json(const std::filesystem::path& path, const MetricsRow& row) {
  const Metrics& m = row.metrics;
  nlohmann::ordered_json j;
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); };
  auto speeds = [](const Vector6d& v) {
    std::vector<double> out;
    for (int i = 0; i < kArmJoints; ++i) out.push_back(v(i) * kDegPerRad);
    return out;
  };
  j["label"] = row.label;
  j["m"] = row.m;
  j["T_c_s"] = row.T_c;
  j["final_position_error_m"] = m.final_position_error;
  j["final_pose_error"] = m.final_pose_error;
  j["settling_time_s"] = opt(m.settling_time);
  j["base_settling_time_s"] = opt(m.base_settling_time);
  j["min_distance_m"] = std::isfinite(m.min_obstacle_distance) ? nlohmann::json(m.min_obstacle_distance)
                                                               : nlohmann::json();
  j["max_joint_speed_arm1_deg_s"] = speeds(m.max_joint_speed[0]);
  j["max_joint_speed_arm2_deg_s"] = speeds(m.max_joint_speed[1]);
  j["base_position_error_peak_m"] = m.base_position_error_peak;
  j["base_attitude_error_peak"] = m.base_attitude_error_peak;
  j["max_momentum_residual"] = m.max_momentum_residual;
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

namespace {

const char* kPlotPrelude = R"(import os
import numpy as np
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))


def load(name):
    data = np.genfromtxt(os.path.join(here, name), delimiter=",", names=True)
    return data

)";

std::string py_list(const std::vector<std::string>& items) {
  std::string s = "[";
  for (std::size_t i = 0; i < items.size(); ++i) s += (i ? ", " : "") + ("\"" + items[i] + "\"");
  return s + "]";
}

}  // namespace

void write_compare_plot_script(const std::filesystem::path& path,
                               const std::vector<std::string>& trajectory_files,
                               const std::vector<std::string>& labels) {
  auto out = open_out(path);
  out << kPlotPrelude;
  out << "files = " << py_list(trajectory_files) << "\n";
  out << "labels = " << py_list(labels) << "\n";
  out << R"(runs = [load(f) for f in files]

fig, ax = plt.subplots()
for d, lab in zip(runs, labels):
    ax.plot(d["t"], d["dmin"], label=lab)
ax.axhline(0.2, color="k", ls="--", lw=0.8)
ax.set_xlabel("t [s]")
ax.set_ylabel("min distance to obstacle [m]")
ax.legend()
fig.savefig(os.path.join(here, "compare_distance.png"), dpi=150)

fig, ax = plt.subplots()
for d, lab in zip(runs, labels):
    ax.semilogy(d["t"], np.maximum(d["e1_norm"], 1e-16), label=lab)
ax.set_xlabel("t [s]")
ax.set_ylabel("|e1|")
ax.legend()
fig.savefig(os.path.join(here, "compare_ee_error.png"), dpi=150)

fig, axs = plt.subplots(2, 1, sharex=True)
for d, lab in zip(runs, labels):
    axs[0].plot(d["t"], d["e0p_norm"], label=lab)
    axs[1].plot(d["t"], np.max(np.abs([d["dth2_%d" % j] for j in range(1, 7)]), axis=0) * 180 / np.pi, label=lab)
axs[0].set_ylabel("|e0_p| [m]")
axs[1].set_ylabel("max |dth2| [deg/s]")
axs[1].set_xlabel("t [s]")
axs[0].legend()
fig.savefig(os.path.join(here, "compare_base.png"), dpi=150)
)";
}

void write_optimize_plot_script(const std::filesystem::path& path, const std::string& ga_csv,
                                const std::string& best_csv, const std::string& baseline_csv) {
  auto out = open_out(path);
  out << kPlotPrelude;
  out << "ga = load(\"" << ga_csv << "\")\n";
  out << "best = load(\"" << best_csv << "\")\n";
  out << "base = load(\"" << baseline_csv << "\")\n";
  out << R"(
fig, ax = plt.subplots()
ax.plot(ga["generation"], ga["best_F"], label="best F")
ax.plot(ga["generation"], ga["avg_F"], label="average F")
ax.set_xlabel("generation")
ax.set_ylabel("selection fitness")
ax.legend()
fig.savefig(os.path.join(here, "ga_fitness.png"), dpi=150)

for arm in (1, 2):
    fig, axs = plt.subplots(2, 1, sharex=True)
    for ax, d, title in ((axs[0], base, "baseline"), (axs[1], best, "optimized")):
        for j in range(1, 7):
            ax.plot(d["t"], d["dth%d_%d" % (arm, j)] * 180 / np.pi, label="joint %d" % j)
        ax.set_title(title)
        ax.set_ylabel("deg/s")
    axs[1].set_xlabel("t [s]")
    axs[0].legend(ncol=3, fontsize="small")
    fig.savefig(os.path.join(here, "joint_speed_arm%d.png" % arm), dpi=150)

fig, ax = plt.subplots()
ax.semilogy(best["t"], np.maximum(best["e1_norm"], 1e-16), label="optimized")
ax.semilogy(base["t"], np.maximum(base["e1_norm"], 1e-16), label="baseline")
ax.set_xlabel("t [s]")
ax.set_ylabel("|e1|")
ax.legend()
fig.savefig(os.path.join(here, "optimized_error.png"), dpi=150)
)";
}

void write_run_plot_script(const std::filesystem::path& path, const std::string& trajectory_csv) {
  auto out = open_out(path);
  out << kPlotPrelude;
  out << "d = load(\"" << trajectory_csv << "\")\n";
  out << R"(
fig, axs = plt.subplots(3, 1, sharex=True, figsize=(7, 8))
axs[0].semilogy(d["t"], np.maximum(d["e1_norm"], 1e-16))
axs[0].set_ylabel("|e1|")
axs[1].plot(d["t"], d["dmin"])
axs[1].set_ylabel("min distance [m]")
for arm in (1, 2):
    axs[2].plot(d["t"], np.max(np.abs([d["dth%d_%d" % (arm, j)] for j in range(1, 7)]), axis=0) * 180 / np.pi, label="arm %d" % arm)
axs[2].set_ylabel("max joint speed [deg/s]")
axs[2].set_xlabel("t [s]")
axs[2].legend()
fig.savefig(os.path.join(here, "run.png"), dpi=150)
)";
}

}  // namespace ffsr
