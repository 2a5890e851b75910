#pragma once

// CSV persistence of rollouts and GA runs, comparison tables, and generated
// matplotlib scripts. Numbers are written with 17 significant digits so
// every file re-parses to the exact in-memory doubles.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ffsr/genetic.hpp"
#include "ffsr/simulation.hpp"

namespace ffsr {

/// The 43 trajectory columns in file order.
const std::vector<std::string>& trajectory_columns();

/// Flat row of one log record, matching trajectory_columns().
std::vector<double> trajectory_row(const LogRecord& r);

void write_trajectory_csv(std::ostream& out, const TrajectoryLog& log);
void write_trajectory_csv(const std::filesystem::path& path, const TrajectoryLog& log);

/// Header plus numeric rows, as parsed back from a CSV file.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;  // throws if absent
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv(const std::filesystem::path& path);

void write_ga_report_csv(std::ostream& out, const GaReport& report);
void write_ga_report_csv(const std::filesystem::path& path, const GaReport& report);

/// One labelled row of a comparison table.
struct MetricsRow {
  std::string label;
  double m = 0.0;
  double T_c = 0.0;
  Metrics metrics;
};

/// Machine-readable table; unsettled times are written as "nan".
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows);
/// Fixed-width text table for the console and report files.
std::string format_metrics_table(const std::vector<MetricsRow>& rows);
/// Per-arm per-joint maxima in deg/s.
void write_joint_speed_csv(const std::filesystem::path& path, const std::vector<MetricsRow>& rows);

void write_metrics_json(const std::filesystem::path& path, const MetricsRow& row);

/// Scripts load only the data files named here, relative to the script.
void write_compare_plot_script(const std::filesystem::path& path,
                               const std::vector<std::string>& trajectory_files,
                               const std::vector<std::string>& labels);
void write_optimize_plot_script(const std::filesystem::path& path, const std::string& ga_csv,
                                const std::string& best_csv, const std::string& baseline_csv);
void write_run_plot_script(const std::filesystem::path& path, const std::string& trajectory_csv);

}  // namespace ffsr
