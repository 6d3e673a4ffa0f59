#pragma once

#include <algorithm>
#include <vector>

#include "mmo/algorithms/common.hpp"

namespace mmo {

/// Swarm member with its bounded personal-best archive.
struct Particle {
  std::vector<double> position;
  std::vector<double> velocity;
  Population personal_archive;
};

namespace detail {

inline std::vector<double> scd_of(const Population& pop) { return special_crowding_distance(pop); }

/// Adds `s` unless its decision is already archived, keeps the non-dominated
/// part and trims it to `capacity` by special crowding distance.
inline void update_personal_archive(Population& archive, const Solution& s, std::size_t capacity) {
  for (const auto& a : archive) {
    if (a.decision == s.decision) return;
  }
  archive.push_back(s);
  archive = non_dominated_filter(archive);
  archive = truncate_iteratively(std::move(archive), capacity, scd_of);
}

inline const Solution& most_isolated(const Population& pop) { return pop[argmax(scd_of(pop))]; }

}  // namespace detail

/// Multiobjective PSO with ring-topology niches and special crowding distance.
/// Particle i learns from its own archive and from the non-dominated union of
/// the archives of i-1, i and i+1.
template <MultiobjectiveProblem P>
RunResult run_mo_ring_pso_scd(const P& problem, const AlgorithmConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  detail::RunClock clock;
  RandomStream rng(seed);
  EvaluationBudget budget(cfg.max_evaluations);
  Evaluator<P> eval(problem, budget);
  const Bounds& bounds = problem.spec().bounds;
  const std::size_t n = cfg.population_size;
  const std::size_t dim = bounds.dim();

  RunResult result;
  result.seed = seed;
  detail::SizeTrace trace;

  std::vector<Particle> swarm;
  swarm.reserve(n);
  while (swarm.size() < n && eval.remaining() > 0) {
    Particle p;
    p.position = detail::random_decision(problem, rng);
    p.velocity.assign(dim, 0.0);
    if (cfg.initial_velocity_scale > 0.0) {
      for (std::size_t d = 0; d < dim; ++d) {
        const double w = (bounds.upper[d] - bounds.lower[d]) * cfg.initial_velocity_scale;
        p.velocity[d] = rng.uniform(-w, w);
      }
    }
    p.personal_archive.push_back(eval(p.position));
    swarm.push_back(std::move(p));
  }
  trace.observe(swarm.size());

  if (swarm.size() == n) {
    std::vector<std::vector<double>> pbest(n), nbest(n);
    while (eval.remaining() > 0) {
      for (std::size_t i = 0; i < n; ++i) {
        pbest[i] = detail::most_isolated(swarm[i].personal_archive).decision;
        Population ring;
        for (std::size_t j : {(i + n - 1) % n, i, (i + 1) % n}) {
          const auto& pa = swarm[j].personal_archive;
          ring.insert(ring.end(), pa.begin(), pa.end());
        }
        nbest[i] = detail::most_isolated(non_dominated_filter(detail::unique_decisions(ring))).decision;
      }
      for (std::size_t i = 0; i < n && eval.remaining() > 0; ++i) {
        Particle& p = swarm[i];
        for (std::size_t d = 0; d < dim; ++d) {
          const double r1 = rng.uniform();
          const double r2 = rng.uniform();
          p.velocity[d] = cfg.pso_inertia * p.velocity[d] + cfg.pso_c1 * r1 * (pbest[i][d] - p.position[d]) +
                          cfg.pso_c2 * r2 * (nbest[i][d] - p.position[d]);
          p.position[d] += p.velocity[d];
        }
        const auto clamped = bounds.clamp(p.position);
        for (std::size_t d = 0; d < dim; ++d) {
          if (clamped[d]) p.velocity[d] = 0.0;
        }
        problem.repair(p.position);
        detail::update_personal_archive(p.personal_archive, eval(p.position), cfg.pba_capacity);
      }
      ++result.generations;
      trace.observe(swarm.size());
    }
  }

  Population all;
  for (const auto& p : swarm) all.insert(all.end(), p.personal_archive.begin(), p.personal_archive.end());
  all = non_dominated_filter(detail::unique_decisions(all));
  result.final_archive = detail::truncate_iteratively(std::move(all), n, detail::scd_of);
  result.evaluations_used = budget.used();
  result.min_population = trace.min;
  result.max_population = trace.max;
  result.wall_time = clock.seconds();
  return result;
}

}  // namespace mmo
