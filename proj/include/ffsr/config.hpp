#pragma once

// Scenario configuration files (YAML). Every physical quantity carries its
// unit: scalars as "<number> <unit>" strings, vectors and matrices as a
// one-key map from the unit to the values, e.g.
//
//   danger_radius: 0.2 m
//   position: {m: [-0.0691, 0.6037, 0.4742]}
//   theta: {deg: [0, 47.72, -93.91, 0, -23.82, 0]}
//
// Dimensionless values (quaternions in w, x, y, z order, gains, weights) are
// plain numbers.

#include <optional>
#include <stdexcept>
#include <string>

#include "ffsr/genetic.hpp"
#include "ffsr/simulation.hpp"

namespace ffsr {

/// Parse or validation failure; `field` is the dotted path of the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, int line, const std::string& message);
  std::string field;
  int line;  // 1-based, 0 when unknown
};

struct OptimizeSettings {
  GaConfig ga;
  double baseline_m = 0.1;
  /// Baseline T_c; the frozen GA value (or the scenario's) when empty.
  std::optional<double> baseline_Tc;
};

struct ScenarioConfig {
  Scenario scenario;
  OptimizeSettings optimize;
};

/// Unit factors to SI for the unit tokens accepted in configuration files.
/// Throws std::invalid_argument for an unknown unit or a unit of the wrong
/// kind ("length", "angle", "time", "mass", "inertia", "rate",
/// "angular_rate", "linear_momentum", "angular_momentum").
double unit_factor(const std::string& unit, const std::string& kind);

/// Parses "<number> <unit>" into SI. Throws std::invalid_argument.
double parse_quantity(const std::string& text, const std::string& kind);

ScenarioConfig parse_config(const std::string& yaml_text, const std::string& source = "<string>");
ScenarioConfig load_config(const std::string& path);

/// Reads only the `ga:` section of a file, on top of `defaults`.
OptimizeSettings load_optimize_settings(const std::string& path, OptimizeSettings defaults = {});

}  // namespace ffsr
