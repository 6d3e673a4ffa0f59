#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mmo/algorithms/common.hpp"

namespace mmo {

/// Mean distance from each point to its nearest neighbour; 0 for fewer than two points.
inline double mean_nearest_neighbor_distance(std::span<const std::vector<double>> pts) {
  const std::size_t n = pts.size();
  if (n < 2) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double best = kInf;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) best = std::min(best, euclidean(pts[i], pts[j]));
    }
    sum += best;
  }
  return sum / static_cast<double>(n);
}

/// Bandwidth of the proximity kernel: the mean nearest-neighbour distance, so
/// the indicator measures local rather than global crowding.
inline double kernel_bandwidth(std::span<const std::vector<double>> pts) { return mean_nearest_neighbor_distance(pts); }

/// Distance weight exp(-d / sigma); with sigma = 0 every point coincides.
inline double proximity_weight(double d, double sigma) {
  if (sigma > 0.0) return std::exp(-d / sigma);
  return d == 0.0 ? 1.0 : 0.0;
}

/// Weighted crowding indicator I_i = sum_{j != i} exp(-d_ij / sigma) over the
/// given points. Smaller means sparser.
inline std::vector<double> weighted_crowding(std::span<const std::vector<double>> pts, double sigma) {
  std::vector<double> out(pts.size(), 0.0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double w = proximity_weight(euclidean(pts[i], pts[j]), sigma);
      out[i] += w;
      out[j] += w;
    }
  }
  return out;
}

namespace detail {

/// Removes the highest-indicator member among `removable` until `target`
/// members are left in total; indicator is kept current by subtracting the
/// removed member's weights. Returns the surviving indices in ascending order.
inline std::vector<std::size_t> shed_crowded(std::span<const std::vector<double>> pts,
                                             const std::vector<bool>& removable, std::size_t target, double sigma) {
  const std::size_t n = pts.size();
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) dist[i * n + j] = dist[j * n + i] = euclidean(pts[i], pts[j]);
  }
  std::vector<double> ind(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) ind[i] += proximity_weight(dist[i * n + j], sigma);
    }
  }
  std::vector<bool> alive(n, true);
  std::size_t count = n;
  while (count > target) {
    std::size_t worst = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (alive[i] && removable[i] && (worst == n || ind[i] > ind[worst])) worst = i;
    }
    if (worst == n) break;
    alive[worst] = false;
    --count;
    for (std::size_t i = 0; i < n; ++i) {
      if (alive[i]) ind[i] -= proximity_weight(dist[i * n + worst], sigma);
    }
  }
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < n; ++i) {
    if (alive[i]) keep.push_back(i);
  }
  return keep;
}

/// Non-dominated, decision-unique archive trimmed to `capacity` by repeatedly
/// dropping the member with the smallest objective-space crowding distance.
inline Population update_convergence_archive(const Population& archive, const Population& incoming,
                                             std::size_t capacity) {
  Population all = archive;
  all.insert(all.end(), incoming.begin(), incoming.end());
  all = non_dominated_filter(unique_decisions(all));
  return truncate_iteratively(std::move(all), capacity,
                              [](const Population& p) { return crowding_distance(p, Space::objective); });
}

inline Population shed_to_size(const Population& pop, const Bounds& bounds, std::size_t target) {
  if (pop.size() <= target) return pop;
  const auto z = normalized_decisions(pop, bounds);
  const double sigma = kernel_bandwidth(z);
  const auto keep = shed_crowded(z, std::vector<bool>(pop.size(), true), target, sigma);
  Population out;
  for (std::size_t i : keep) out.push_back(pop[i]);
  return out;
}

/// Front-by-front survival; the split front sheds its most crowded members,
/// measured against everything already selected.
inline Population select_by_weighted_crowding(const Population& merged, const Bounds& bounds, std::size_t n) {
  const auto fronts = non_dominated_sort(merged);
  std::vector<std::size_t> chosen;
  std::vector<std::size_t> split;
  for (const auto& front : fronts) {
    if (chosen.size() + front.size() <= n) {
      chosen.insert(chosen.end(), front.begin(), front.end());
      if (chosen.size() == n) break;
      continue;
    }
    split = front;
    break;
  }
  Population next;
  next.reserve(n);
  if (split.empty()) {
    std::sort(chosen.begin(), chosen.end());
    for (std::size_t i : chosen) next.push_back(merged[i]);
    return next;
  }
  const auto z_all = normalized_decisions(merged, bounds);
  const double sigma = kernel_bandwidth(z_all);
  std::vector<std::size_t> candidates = chosen;
  candidates.insert(candidates.end(), split.begin(), split.end());
  std::sort(candidates.begin(), candidates.end());
  std::vector<std::vector<double>> z;
  std::vector<bool> removable;
  for (std::size_t i : candidates) {
    z.push_back(z_all[i]);
    removable.push_back(std::binary_search(split.begin(), split.end(), i));
  }
  for (std::size_t k : shed_crowded(z, removable, n, sigma)) next.push_back(merged[candidates[k]]);
  return next;
}

}  // namespace detail

/// Evolutionary algorithm with a decision-space weighted crowding indicator
/// and a convergence archive that feeds half of every mating pool.
template <MultiobjectiveProblem P>
RunResult run_mmea_wi(const P& problem, const AlgorithmConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  detail::RunClock clock;
  RandomStream rng(seed);
  EvaluationBudget budget(cfg.max_evaluations);
  Evaluator<P> eval(problem, budget);
  const Bounds& bounds = problem.spec().bounds;
  const std::size_t n = cfg.population_size;
  const std::size_t capacity = cfg.mmea_archive_capacity.value_or(n);

  RunResult result;
  result.seed = seed;
  detail::SizeTrace trace;

  Population pop = detail::initial_population(problem, eval, rng, n);
  trace.observe(pop.size());
  Population archive = detail::update_convergence_archive({}, pop, capacity);

  if (pop.size() == n) {
    while (eval.remaining() > 0) {
      const auto z = detail::normalized_decisions(pop, bounds);
      const auto indicator = weighted_crowding(z, kernel_bandwidth(z));

      std::vector<const std::vector<double>*> pool;
      pool.reserve(n);
      for (std::size_t k = 0; k < n / 2; ++k) {
        std::size_t a = rng.below(n);
        std::size_t b = rng.below(n);
        if (b < a) std::swap(a, b);
        pool.push_back(&pop[indicator[b] < indicator[a] ? b : a].decision);
      }
      while (pool.size() < n) pool.push_back(&archive[rng.below(archive.size())].decision);
      rng.shuffle(pool);

      Population offspring = detail::make_offspring(problem, eval, cfg, pool, n, rng);
      archive = detail::update_convergence_archive(archive, offspring, capacity);

      Population merged = std::move(pop);
      merged.insert(merged.end(), std::make_move_iterator(offspring.begin()), std::make_move_iterator(offspring.end()));
      pop = detail::select_by_weighted_crowding(merged, bounds, n);
      ++result.generations;
      trace.observe(pop.size());
    }
  }

  Population final_set = archive;
  final_set.insert(final_set.end(), pop.begin(), pop.end());
  final_set = non_dominated_filter(detail::unique_decisions(final_set));
  result.final_archive = detail::shed_to_size(final_set, bounds, n);
  result.evaluations_used = budget.used();
  result.min_population = trace.min;
  result.max_population = trace.max;
  result.wall_time = clock.seconds();
  return result;
}

}  // namespace mmo
