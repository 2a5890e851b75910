#pragma once

// Bundled reference robot and scenario. Initial conditions, the target, the
// obstacle and the algorithm parameters are fixed values; link dimensions,
// masses, mounts and the planned start offset are chosen to fit them.

#include "ffsr/genetic.hpp"
#include "ffsr/simulation.hpp"

namespace ffsr::reference {

RobotModel robot();

/// Initial state, target, obstacle and planner parameters on robot().
/// Method predefined_time, m = 0.1, T_c = 3 s, 20 s at dt = 1e-3 s.
Scenario reference_scenario();

/// S_max = 100, G = 100, P_c = 0.6, P_m = 0.1, alpha = 0.35, beta = 0.65,
/// gamma = 1e-4, 150 and 200 deg/s.
GaConfig reference_ga();

/// The non-optimized comparison point (m, T_c) = (0.1, 2.19 s).
inline constexpr double kBaselineM = 0.1;
inline constexpr double kBaselineTc = 2.19;

}  // namespace ffsr::reference
