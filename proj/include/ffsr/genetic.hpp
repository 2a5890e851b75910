#pragma once

// Real-coded genetic algorithm over the predefined-time parameters (m, T_c).
// The objective B penalizes joint rates above a danger threshold and rejects
// any trajectory that crosses the saturation limit.

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ffsr/simulation.hpp"

namespace ffsr {

inline constexpr double kDegPerRad = 180.0 / 3.14159265358979323846;

struct GeneBounds {
  double m_min = 0.05, m_max = 0.95;
  double Tc_min = 0.5, Tc_max = 5.0;  // s

  void validate() const;
};

struct Chromosome {
  double m = 0.5;
  double T_c = 2.0;  // s
  double B = std::numeric_limits<double>::infinity();
  double F = 0.0;  // 1 / (1 + B)

  bool rejected() const { return !(F > 0.0); }
};

/// Sets B and the selection fitness F = 1/(1+B).
void assign_objective(Chromosome& c, double B);

struct GaConfig {
  std::size_t population = 100;
  std::size_t generations = 100;
  double P_c = 0.6;
  double P_m = 0.1;
  double alpha = 0.35, beta = 0.65, gamma = 1e-4;
  double danger_speed = 150.0 / kDegPerRad;  // rad/s
  double max_speed = 200.0 / kDegPerRad;     // rad/s
  std::uint64_t seed = 1;
  GeneBounds bounds;
  /// Holds T_c at this value and evolves m alone.
  std::optional<double> frozen_Tc;
  /// Worker threads for fitness evaluation; 0 picks the hardware count.
  unsigned threads = 0;

  void validate() const;
};

/// Joint-rate objective of one rollout. Rates enter in degrees per second;
/// each time step contributes the left sample times the step length.
double objective_B(const TrajectoryLog& log, const GaConfig& cfg);

/// Uniform double in [0, 1) built from the top 53 bits of one draw, so the
/// stream is identical across standard libraries.
double uniform01(std::mt19937_64& rng);

class AllRejected : public std::runtime_error {
 public:
  AllRejected() : std::runtime_error("roulette: every individual is rejected") {}
};

/// Index drawn with probability F_i / sum F. Throws AllRejected when sum F = 0.
std::size_t roulette_index(std::span<const Chromosome> population, std::mt19937_64& rng);
Chromosome roulette_select(std::span<const Chromosome> population, std::mt19937_64& rng);

/// With probability P_c swaps one randomly chosen gene between the parents.
std::pair<Chromosome, Chromosome> crossover(const Chromosome& a, const Chromosome& b,
                                            double P_c, std::mt19937_64& rng);

/// With probability P_m redraws one randomly chosen free gene uniformly.
Chromosome mutate(const Chromosome& c, double P_m, std::mt19937_64& rng,
                  const GeneBounds& bounds = {}, bool freeze_Tc = false);

Chromosome random_chromosome(std::mt19937_64& rng, const GeneBounds& bounds,
                             std::optional<double> frozen_Tc = std::nullopt);

struct GenerationStats {
  std::size_t generation = 0;
  double best_F = 0.0;
  double avg_F = 0.0;
  double best_m = 0.0;
  double best_Tc = 0.0;
  double best_B = std::numeric_limits<double>::infinity();
};

struct GaReport {
  std::vector<GenerationStats> generations;
  Chromosome best;
  std::vector<Chromosome> final_population;
  /// Every evaluated individual had the same selection fitness.
  bool degenerate = false;
  std::size_t evaluations = 0;  // distinct rollouts
  std::size_t cache_hits = 0;
  std::vector<std::string> events;
};

using Evaluator = std::function<TrajectoryLog(const Chromosome&)>;

GaReport run_ga(const GaConfig& cfg, const Evaluator& evaluator);

/// Evaluator that rolls out `base` with the chromosome's (m, T_c) under the
/// predefined-time method and stops as soon as a rate crosses the saturation
/// limit.
Evaluator scenario_evaluator(const Scenario& base, const GaConfig& cfg);

}  // namespace ffsr
