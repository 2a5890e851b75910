#include "ffsr/genetic.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <map>
#include <thread>

namespace ffsr {

void GeneBounds::validate() const {
  if (!(m_min > 0.0 && m_min <= m_max && m_max < 1.0))
    throw std::invalid_argument("ga: need 0 < m_min <= m_max < 1");
  if (!(Tc_min > 0.0 && Tc_min <= Tc_max)) throw std::invalid_argument("ga: need 0 < Tc_min <= Tc_max");
}

void GaConfig::validate() const {
  bounds.validate();
  if (population < 2) throw std::invalid_argument("ga: population must be at least 2");
  if (!(P_c >= 0.0 && P_c <= 1.0)) throw std::invalid_argument("ga: P_c must lie in [0, 1]");
  if (!(P_m >= 0.0 && P_m <= 1.0)) throw std::invalid_argument("ga: P_m must lie in [0, 1]");
  if (!(alpha >= 0.0 && beta >= 0.0 && gamma >= 0.0))
    throw std::invalid_argument("ga: weights must be non-negative");
  if (!(danger_speed > 0.0 && danger_speed < max_speed))
    throw std::invalid_argument("ga: need 0 < danger speed < max speed");
  if (frozen_Tc && !(*frozen_Tc >= bounds.Tc_min && *frozen_Tc <= bounds.Tc_max))
    throw std::invalid_argument("ga: frozen T_c lies outside the T_c bounds");
}

void assign_objective(Chromosome& c, double B) {
  c.B = B;
  c.F = std::isinf(B) ? 0.0 : 1.0 / (1.0 + B);
}

double objective_B(const TrajectoryLog& log, const GaConfig& cfg) {
  const auto& rec = log.records;
  const double danger = cfg.danger_speed * kDegPerRad;
  double sum1 = 0.0, sum2 = 0.0;
  for (std::size_t k = 0; k < rec.size(); ++k) {
    const double a1 = rec[k].theta_dot1.cwiseAbs().maxCoeff();
    const double a2 = rec[k].theta_dot2.cwiseAbs().maxCoeff();
    if (a1 > cfg.max_speed || a2 > cfg.max_speed)
      return std::numeric_limits<double>::infinity();
    if (k + 1 == rec.size()) break;
    const double h = rec[k + 1].t - rec[k].t;
    const double d1 = a1 * kDegPerRad, d2 = a2 * kDegPerRad;
    if (d1 > danger) sum1 += d1 * h;
    if (d2 > danger) sum2 += d2 * h;
  }
  return cfg.gamma * (cfg.alpha * sum1 + cfg.beta * sum2);
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t roulette_index(std::span<const Chromosome> population, std::mt19937_64& rng) {
  double total = 0.0;
  for (const Chromosome& c : population) total += c.F;
  if (!(total > 0.0)) throw AllRejected();
  const double u = uniform01(rng) * total;
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < population.size(); ++i) {
    if (!(population[i].F > 0.0)) continue;
    acc += population[i].F;
    last = i;
    if (u < acc) return i;
  }
  return last;  // u landed on the rounding gap at the top
}

Chromosome roulette_select(std::span<const Chromosome> population, std::mt19937_64& rng) {
  return population[roulette_index(population, rng)];
}

namespace {

void clear_fitness(Chromosome& c) {
  c.B = std::numeric_limits<double>::infinity();
  c.F = 0.0;
}

double redraw(double lo, double hi, std::mt19937_64& rng) {
  return lo == hi ? lo : lo + (hi - lo) * uniform01(rng);
}

}  // namespace

std::pair<Chromosome, Chromosome> crossover(const Chromosome& a, const Chromosome& b,
                                            double P_c, std::mt19937_64& rng) {
  if (!(uniform01(rng) < P_c)) return {a, b};
  Chromosome x = a, y = b;
  if (rng() & 1u)
    std::swap(x.T_c, y.T_c);
  else
    std::swap(x.m, y.m);
  clear_fitness(x);
  clear_fitness(y);
  return {x, y};
}

Chromosome mutate(const Chromosome& c, double P_m, std::mt19937_64& rng,
                  const GeneBounds& bounds, bool freeze_Tc) {
  if (!(uniform01(rng) < P_m)) return c;
  Chromosome out = c;
  const bool pick_Tc = !freeze_Tc && (rng() & 1u);
  if (pick_Tc) {
    // Redraw until the value actually moves so that exactly one gene differs.
    do out.T_c = redraw(bounds.Tc_min, bounds.Tc_max, rng);
    while (out.T_c == c.T_c && bounds.Tc_min < bounds.Tc_max);
  } else {
    do out.m = redraw(bounds.m_min, bounds.m_max, rng);
    while (out.m == c.m && bounds.m_min < bounds.m_max);
  }
  clear_fitness(out);
  return out;
}

Chromosome random_chromosome(std::mt19937_64& rng, const GeneBounds& bounds,
                             std::optional<double> frozen_Tc) {
  Chromosome c;
  c.m = redraw(bounds.m_min, bounds.m_max, rng);
  c.T_c = frozen_Tc ? *frozen_Tc : redraw(bounds.Tc_min, bounds.Tc_max, rng);
  return c;
}

namespace {

using Key = std::pair<std::uint64_t, std::uint64_t>;

Key key_of(const Chromosome& c) {
  return {std::bit_cast<std::uint64_t>(c.m), std::bit_cast<std::uint64_t>(c.T_c)};
}

class FitnessCache {
 public:
  FitnessCache(const GaConfig& cfg, const Evaluator& evaluator, GaReport& report)
      : cfg_(cfg), evaluator_(evaluator), report_(report) {}

  void evaluate(std::vector<Chromosome>& pop) {
    std::vector<Key> missing;
    for (const Chromosome& c : pop) {
      const Key k = key_of(c);
      if (cache_.count(k) == 0 && std::find(missing.begin(), missing.end(), k) == missing.end())
        missing.push_back(k);
    }
    std::vector<double> values(missing.size());
    std::vector<std::string> errors(missing.size());
    auto work = [&](std::size_t i) {
      Chromosome c;
      c.m = std::bit_cast<double>(missing[i].first);
      c.T_c = std::bit_cast<double>(missing[i].second);
      try {
        values[i] = objective_B(evaluator_(c), cfg_);
      } catch (const std::exception& e) {
        values[i] = std::numeric_limits<double>::infinity();
        errors[i] = e.what();
      }
    };
    unsigned n_threads = cfg_.threads ? cfg_.threads : std::thread::hardware_concurrency();
    n_threads = std::max(1u, std::min<unsigned>(n_threads, static_cast<unsigned>(missing.size())));
    if (n_threads <= 1) {
      for (std::size_t i = 0; i < missing.size(); ++i) work(i);
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < n_threads; ++t)
        pool.emplace_back([&] {
          for (std::size_t i; (i = next.fetch_add(1)) < missing.size();) work(i);
        });
    }
    for (std::size_t i = 0; i < missing.size(); ++i) {
      cache_[missing[i]] = values[i];
      if (!errors[i].empty()) report_.events.push_back("evaluation failed, rejected: " + errors[i]);
    }
    report_.evaluations += missing.size();
    for (Chromosome& c : pop) {
      const auto it = cache_.find(key_of(c));
      assign_objective(c, it->second);
    }
    report_.cache_hits += pop.size() - missing.size();
  }

  bool flat() const {
    if (cache_.empty()) return true;
    const double first = cache_.begin()->second;
    return std::all_of(cache_.begin(), cache_.end(),
                       [&](const auto& kv) { return kv.second == first || (std::isinf(kv.second) && std::isinf(first)); });
  }

 private:
  const GaConfig& cfg_;
  const Evaluator& evaluator_;
  GaReport& report_;
  std::map<Key, double> cache_;
};

std::size_t best_index(const std::vector<Chromosome>& pop) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < pop.size(); ++i)
    if (pop[i].F > pop[best].F) best = i;
  return best;
}

GenerationStats stats_of(std::size_t generation, const std::vector<Chromosome>& pop) {
  GenerationStats s;
  s.generation = generation;
  const Chromosome& b = pop[best_index(pop)];
  s.best_F = b.F;
  s.best_m = b.m;
  s.best_Tc = b.T_c;
  s.best_B = b.B;
  double sum = 0.0;
  for (const Chromosome& c : pop) sum += c.F;
  s.avg_F = sum / static_cast<double>(pop.size());
  return s;
}

}  // namespace

GaReport run_ga(const GaConfig& cfg, const Evaluator& evaluator) {
  cfg.validate();
  GaReport report;
  FitnessCache cache(cfg, evaluator, report);
  std::mt19937_64 rng(cfg.seed);
  const bool freeze = cfg.frozen_Tc.has_value();

  auto fresh_population = [&] {
    std::vector<Chromosome> pop;
    pop.reserve(cfg.population);
    for (std::size_t i = 0; i < cfg.population; ++i)
      pop.push_back(random_chromosome(rng, cfg.bounds, cfg.frozen_Tc));
    return pop;
  };

  std::vector<Chromosome> pop = fresh_population();
  cache.evaluate(pop);
  report.generations.push_back(stats_of(0, pop));

  for (std::size_t g = 1; g <= cfg.generations; ++g) {
    if (std::all_of(pop.begin(), pop.end(), [](const Chromosome& c) { return c.rejected(); })) {
      report.events.push_back("generation " + std::to_string(g) +
                              ": every individual rejected, population resampled");
      pop = fresh_population();
      cache.evaluate(pop);
      if (std::all_of(pop.begin(), pop.end(), [](const Chromosome& c) { return c.rejected(); })) {
        report.generations.push_back(stats_of(g, pop));
        continue;
      }
    }
    std::vector<Chromosome> next;
    next.reserve(cfg.population);
    next.push_back(pop[best_index(pop)]);
    while (next.size() < cfg.population) {
      const Chromosome a = roulette_select(pop, rng);
      const Chromosome b = roulette_select(pop, rng);
      auto [x, y] = crossover(a, b, cfg.P_c, rng);
      next.push_back(mutate(x, cfg.P_m, rng, cfg.bounds, freeze));
      if (next.size() < cfg.population) next.push_back(mutate(y, cfg.P_m, rng, cfg.bounds, freeze));
    }
    pop = std::move(next);
    cache.evaluate(pop);
    report.generations.push_back(stats_of(g, pop));
  }

  report.best = pop[best_index(pop)];
  report.final_population = pop;
  report.degenerate = cache.flat();
  if (report.degenerate) report.events.push_back("flat fitness: every evaluation returned the same B");
  return report;
}

Evaluator scenario_evaluator(const Scenario& base, const GaConfig& cfg) {
  return [base, limit = cfg.max_speed](const Chromosome& c) {
    Scenario sc = base;
    sc.method = Method::predefined_time;
    sc.planner.m = c.m;
    sc.planner.T_c = c.T_c;
    RunOptions opt;
    opt.abort_speed = limit;
    return run(sc, opt).log;
  };
}

}  // namespace ffsr
