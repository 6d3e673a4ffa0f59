#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "mmo/algorithms/common.hpp"

namespace mmo {

namespace detail {

/// Front rank and combined (decision + objective) crowding of every member,
/// crowding measured within each member's own front.
struct RankCrowding {
  std::vector<std::size_t> rank;
  std::vector<double> crowding;
};

inline RankCrowding rank_and_crowding(const Population& pop) {
  const auto fronts = non_dominated_sort(pop);
  RankCrowding rc{front_ranks(fronts, pop.size()), std::vector<double>(pop.size(), 0.0)};
  for (const auto& front : fronts) {
    const auto scd = special_crowding_distance(pop, front);
    for (std::size_t k = 0; k < front.size(); ++k) rc.crowding[front[k]] = scd[k];
  }
  return rc;
}

/// Lower rank wins, then larger crowding, then the lower index.
inline std::size_t crowded_tournament(const RankCrowding& rc, RandomStream& rng) {
  const std::size_t n = rc.rank.size();
  std::size_t a = rng.below(n);
  std::size_t b = rng.below(n);
  if (b < a) std::swap(a, b);
  if (rc.rank[a] != rc.rank[b]) return rc.rank[a] < rc.rank[b] ? a : b;
  return rc.crowding[b] > rc.crowding[a] ? b : a;
}

/// Fills whole fronts, then takes the members of the split front with the
/// largest combined crowding.
inline Population crowded_environmental_selection(const Population& merged, std::size_t n) {
  const auto fronts = non_dominated_sort(merged);
  Population next;
  next.reserve(n);
  for (const auto& front : fronts) {
    if (next.size() + front.size() <= n) {
      for (std::size_t i : front) next.push_back(merged[i]);
      if (next.size() == n) break;
      continue;
    }
    const auto scd = special_crowding_distance(merged, front);
    std::vector<std::size_t> order(front.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scd[a] > scd[b]; });
    const std::size_t need = n - next.size();
    std::vector<std::size_t> chosen(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(need));
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t k : chosen) next.push_back(merged[front[k]]);
    break;
  }
  return next;
}

}  // namespace detail

/// Generational elitist GA: crowded binary tournament, SBX and polynomial
/// mutation, (mu + lambda) survival by front rank and combined crowding.
template <MultiobjectiveProblem P>
RunResult run_omni_optimizer(const P& problem, const AlgorithmConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  detail::RunClock clock;
  RandomStream rng(seed);
  EvaluationBudget budget(cfg.max_evaluations);
  Evaluator<P> eval(problem, budget);
  const std::size_t n = cfg.population_size;

  RunResult result;
  result.seed = seed;
  detail::SizeTrace trace;

  Population pop = detail::initial_population(problem, eval, rng, n);
  trace.observe(pop.size());
  if (pop.size() == n) {
    while (eval.remaining() > 0) {
      const auto rc = detail::rank_and_crowding(pop);
      std::vector<const std::vector<double>*> parents;
      parents.reserve(n);
      for (std::size_t k = 0; k < n; ++k) parents.push_back(&pop[detail::crowded_tournament(rc, rng)].decision);
      Population offspring = detail::make_offspring(problem, eval, cfg, parents, n, rng);
      Population merged = std::move(pop);
      merged.insert(merged.end(), std::make_move_iterator(offspring.begin()), std::make_move_iterator(offspring.end()));
      pop = detail::crowded_environmental_selection(merged, n);
      ++result.generations;
      trace.observe(pop.size());
    }
  }

  result.final_archive = non_dominated_filter(pop);
  result.evaluations_used = budget.used();
  result.min_population = trace.min;
  result.max_population = trace.max;
  result.wall_time = clock.seconds();
  return result;
}

}  // namespace mmo
