#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmo/algorithms/operators.hpp"
#include "mmo/core.hpp"
#include "mmo/errors.hpp"
#include "mmo/problems.hpp"
#include "mmo/random.hpp"

namespace mmo {

struct AlgorithmConfig {
  std::size_t population_size = 200;
  std::size_t max_evaluations = 20000;
  double sbx_eta = 20.0;
  double mutation_eta = 20.0;
  double crossover_prob = 1.0;
  std::optional<double> mutation_prob;  // unset: 1 / D

  // MO_Ring_PSO_SCD
  double pso_inertia = 0.7298;
  double pso_c1 = 1.49618;
  double pso_c2 = 1.49618;
  std::size_t pba_capacity = 5;
  double initial_velocity_scale = 0.0;  // fraction of the box width

  // CPDEA
  std::size_t cpdea_k = 3;

  // MMEA-WI; unset: population_size
  std::optional<std::size_t> mmea_archive_capacity;

  void validate() const {
    if (population_size < 4 || population_size % 2 != 0) {
      throw ConfigError("population_size must be even and at least 4");
    }
    if (max_evaluations < population_size) throw ConfigError("max_evaluations must be >= population_size");
    if (pba_capacity == 0) throw ConfigError("pba_capacity must be positive");
    if (cpdea_k == 0) throw ConfigError("cpdea_k must be positive");
    if (mmea_archive_capacity && *mmea_archive_capacity == 0) throw ConfigError("archive capacity must be positive");
  }

  double mutation_probability(std::size_t dim) const {
    return mutation_prob ? *mutation_prob : 1.0 / static_cast<double>(dim);
  }
};

struct RunResult {
  Population final_archive;
  std::size_t evaluations_used = 0;
  std::uint64_t seed = 0;
  double wall_time = 0.0;  // seconds
  std::size_t generations = 0;
  std::size_t min_population = 0;
  std::size_t max_population = 0;
};

namespace detail {

class RunClock {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

/// Tracks population sizes seen at the end of each generation.
struct SizeTrace {
  std::size_t min = 0;
  std::size_t max = 0;
  bool seen = false;

  void observe(std::size_t n) {
    if (!seen) {
      min = max = n;
      seen = true;
    } else {
      min = std::min(min, n);
      max = std::max(max, n);
    }
  }
};

template <MultiobjectiveProblem P>
std::vector<double> random_decision(const P& problem, RandomStream& rng) {
  const Bounds& b = problem.spec().bounds;
  std::vector<double> x(b.dim());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(b.lower[i], b.upper[i]);
  problem.repair(x);
  return x;
}

/// Uniform initial population, cut short if the budget runs out.
template <MultiobjectiveProblem P>
Population initial_population(const P& problem, Evaluator<P>& eval, RandomStream& rng, std::size_t n) {
  Population pop;
  pop.reserve(n);
  while (pop.size() < n && eval.remaining() > 0) pop.push_back(eval(random_decision(problem, rng)));
  return pop;
}

/// Recombines consecutive pairs of `parents` into at most `count` evaluated children.
template <MultiobjectiveProblem P>
Population make_offspring(const P& problem, Evaluator<P>& eval, const AlgorithmConfig& cfg,
                          std::span<const std::vector<double>* const> parents, std::size_t count, RandomStream& rng) {
  const Bounds& b = problem.spec().bounds;
  const double pm = cfg.mutation_probability(b.dim());
  Population out;
  out.reserve(count);
  for (std::size_t k = 0; out.size() < count && eval.remaining() > 0; k += 2) {
    const auto& a = *parents[k % parents.size()];
    const auto& c = *parents[(k + 1) % parents.size()];
    auto [x1, x2] = sbx_crossover(a, c, b, cfg.sbx_eta, cfg.crossover_prob, rng);
    x1 = polynomial_mutation(std::move(x1), b, cfg.mutation_eta, pm, rng);
    x2 = polynomial_mutation(std::move(x2), b, cfg.mutation_eta, pm, rng);
    problem.repair(x1);
    problem.repair(x2);
    out.push_back(eval(std::move(x1)));
    if (out.size() < count && eval.remaining() > 0) out.push_back(eval(std::move(x2)));
  }
  return out;
}

/// Decision vectors scaled to the unit box.
inline std::vector<std::vector<double>> normalized_decisions(const Population& pop, const Bounds& b) {
  std::vector<std::vector<double>> out;
  out.reserve(pop.size());
  for (const auto& s : pop) {
    std::vector<double> z(s.decision.size());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = (s.decision[i] - b.lower[i]) / (b.upper[i] - b.lower[i]);
    out.push_back(std::move(z));
  }
  return out;
}

/// Index of the largest value; ties keep the lower index.
inline std::size_t argmax(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

inline std::size_t argmin(std::span<const double> v) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] < v[best]) best = i;
  }
  return best;
}

/// Drops members whose decision vector already appeared earlier.
inline Population unique_decisions(const Population& pop) {
  Population out;
  out.reserve(pop.size());
  for (const auto& s : pop) {
    const bool seen = std::any_of(out.begin(), out.end(), [&](const Solution& o) { return o.decision == s.decision; });
    if (!seen) out.push_back(s);
  }
  return out;
}

/// Repeatedly removes the member with the smallest score until `target`
/// remain. `score` is re-evaluated on the survivors after every removal.
template <class ScoreFn>
Population truncate_iteratively(Population pop, std::size_t target, ScoreFn score) {
  while (pop.size() > target) {
    const std::vector<double> s = score(pop);
    pop.erase(pop.begin() + static_cast<std::ptrdiff_t>(argmin(s)));
  }
  return pop;
}

}  // namespace detail

}  // namespace mmo
