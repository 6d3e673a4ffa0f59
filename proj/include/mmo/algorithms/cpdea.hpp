#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "mmo/algorithms/common.hpp"

namespace mmo {

/// Convergence-penalized density over a fixed member set that supports
/// removing members one at a time.
///
///   q_i   = 1 / (1 + #{j in kNN(i) : j dominates i})     (kNN in decision space)
///   d'_ij = d_ij * (q_i + q_j) / 2
///   rho_i = 1 / (1 + mean of the k smallest d'_ij)
///
/// Poorly converged members get shrunken transformed distances and therefore
/// higher density. After a removal only the affected rows are rescanned; the
/// result is identical to recomputing from scratch.
class ConvergencePenalizedDensity {
 public:
  ConvergencePenalizedDensity(const Population& pop, std::span<const std::vector<double>> scaled_decisions,
                              std::size_t k)
      : n_(pop.size()), k_(k), dist_(n_ * n_, 0.0), dominated_by_(n_ * n_, 0), alive_(n_, 1),
        alive_count_(n_), q_(n_, 1.0), knn_(n_), top_(n_), density_(n_, 0.0) {
    if (k_ == 0) throw ContractViolation("density neighbourhood size must be positive");
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = i + 1; j < n_; ++j) {
        const double d = euclidean(scaled_decisions[i], scaled_decisions[j]);
        dist_[i * n_ + j] = dist_[j * n_ + i] = d;
        if (dominates(pop[j], pop[i])) dominated_by_[i * n_ + j] = 1;
        if (dominates(pop[i], pop[j])) dominated_by_[j * n_ + i] = 1;
      }
    }
    order_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) {
      auto& o = order_[i];
      for (std::size_t j = 0; j < n_; ++j) {
        if (j != i) o.push_back(j);
      }
      std::sort(o.begin(), o.end(), [&](std::size_t a, std::size_t b) {
        const double da = dist_[i * n_ + a];
        const double db = dist_[i * n_ + b];
        return da != db ? da < db : a < b;
      });
    }
    for (std::size_t i = 0; i < n_; ++i) refresh_quality(i);
    for (std::size_t i = 0; i < n_; ++i) rescan(i);
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t alive_count() const noexcept { return alive_count_; }
  bool alive(std::size_t i) const { return alive_[i] != 0; }
  double density(std::size_t i) const { return density_[i]; }
  double quality(std::size_t i) const { return q_[i]; }

  /// Alive member with the highest density; ties keep the lower index.
  std::size_t densest() const {
    std::size_t best = n_;
    for (std::size_t i = 0; i < n_; ++i) {
      if (alive_[i] && (best == n_ || density_[i] > density_[best])) best = i;
    }
    return best;
  }

  void remove(std::size_t r) {
    if (!alive_[r]) return;
    alive_[r] = 0;
    --alive_count_;

    std::vector<std::size_t> changed_q;
    for (std::size_t i = 0; i < n_; ++i) {
      if (!alive_[i] || !contains(knn_[i], r)) continue;
      const double before = q_[i];
      refresh_quality(i);
      if (q_[i] != before) changed_q.push_back(i);
    }
    for (std::size_t i = 0; i < n_; ++i) {
      if (!alive_[i]) continue;
      bool full = contains_index(top_[i], r) || contains(changed_q, i);
      for (std::size_t j : changed_q) {
        if (full) break;
        if (contains_index(top_[i], j)) full = true;
      }
      if (full) {
        rescan(i);
        continue;
      }
      if (changed_q.empty()) continue;
      for (std::size_t j : changed_q) offer(i, j);
      update_density(i);
    }
  }

 private:
  struct Entry {
    double value;
    std::size_t index;
  };

  static bool contains(const std::vector<std::size_t>& v, std::size_t x) {
    return std::find(v.begin(), v.end(), x) != v.end();
  }
  static bool contains_index(const std::vector<Entry>& v, std::size_t x) {
    return std::any_of(v.begin(), v.end(), [x](const Entry& e) { return e.index == x; });
  }

  double transformed(std::size_t i, std::size_t j) const { return dist_[i * n_ + j] * (q_[i] + q_[j]) * 0.5; }

  void refresh_quality(std::size_t i) {
    auto& nn = knn_[i];
    nn.clear();
    std::size_t dominating = 0;
    for (std::size_t j : order_[i]) {
      if (nn.size() == k_) break;
      if (!alive_[j]) continue;
      nn.push_back(j);
      dominating += dominated_by_[i * n_ + j];
    }
    q_[i] = 1.0 / (1.0 + static_cast<double>(dominating));
  }

  /// Inserts j into i's k smallest transformed distances if it belongs there.
  void offer(std::size_t i, std::size_t j) {
    if (j == i || !alive_[j]) return;
    auto& top = top_[i];
    const Entry e{transformed(i, j), j};
    if (top.size() < k_) {
      top.push_back(e);
    } else {
      auto worst = std::max_element(top.begin(), top.end(), [](const Entry& a, const Entry& b) { return a.value < b.value; });
      if (!(e.value < worst->value)) return;
      *worst = e;
    }
  }

  void rescan(std::size_t i) {
    top_[i].clear();
    for (std::size_t j = 0; j < n_; ++j) offer(i, j);
    update_density(i);
  }

  void update_density(std::size_t i) {
    std::vector<double> vals;
    vals.reserve(top_[i].size());
    for (const auto& e : top_[i]) vals.push_back(e.value);
    std::sort(vals.begin(), vals.end());
    double sum = 0.0;
    for (double v : vals) sum += v;
    const double mean = vals.empty() ? 0.0 : sum / static_cast<double>(vals.size());
    density_[i] = 1.0 / (1.0 + mean);
  }

  std::size_t n_;
  std::size_t k_;
  std::vector<double> dist_;
  std::vector<unsigned char> dominated_by_;  // [i * n + j]: j dominates i
  std::vector<unsigned char> alive_;
  std::size_t alive_count_;
  std::vector<double> q_;
  std::vector<std::vector<std::size_t>> order_;
  std::vector<std::vector<std::size_t>> knn_;
  std::vector<std::vector<Entry>> top_;
  std::vector<double> density_;
};

namespace detail {

/// Lower density wins; ties keep the lower index.
inline std::size_t density_tournament(std::span<const double> density, RandomStream& rng) {
  std::size_t a = rng.below(density.size());
  std::size_t b = rng.below(density.size());
  if (b < a) std::swap(a, b);
  return density[b] < density[a] ? b : a;
}

}  // namespace detail

/// Density-driven evolutionary algorithm: offspring from density tournaments,
/// survival by repeatedly discarding the densest member of parents + offspring.
template <MultiobjectiveProblem P>
RunResult run_cpdea(const P& problem, const AlgorithmConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  detail::RunClock clock;
  RandomStream rng(seed);
  EvaluationBudget budget(cfg.max_evaluations);
  Evaluator<P> eval(problem, budget);
  const Bounds& bounds = problem.spec().bounds;
  const std::size_t n = cfg.population_size;

  RunResult result;
  result.seed = seed;
  detail::SizeTrace trace;

  Population pop = detail::initial_population(problem, eval, rng, n);
  trace.observe(pop.size());
  if (pop.size() == n) {
    std::vector<double> density;
    {
      const auto z = detail::normalized_decisions(pop, bounds);
      ConvergencePenalizedDensity cpd(pop, z, cfg.cpdea_k);
      for (std::size_t i = 0; i < n; ++i) density.push_back(cpd.density(i));
    }
    while (eval.remaining() > 0) {
      std::vector<const std::vector<double>*> parents;
      parents.reserve(n);
      for (std::size_t k = 0; k < n; ++k) parents.push_back(&pop[detail::density_tournament(density, rng)].decision);
      Population offspring = detail::make_offspring(problem, eval, cfg, parents, n, rng);
      Population merged = std::move(pop);
      merged.insert(merged.end(), std::make_move_iterator(offspring.begin()), std::make_move_iterator(offspring.end()));

      const auto z = detail::normalized_decisions(merged, bounds);
      ConvergencePenalizedDensity cpd(merged, z, cfg.cpdea_k);
      while (cpd.alive_count() > n) cpd.remove(cpd.densest());
      pop.clear();
      density.clear();
      for (std::size_t i = 0; i < merged.size(); ++i) {
        if (!cpd.alive(i)) continue;
        pop.push_back(std::move(merged[i]));
        density.push_back(cpd.density(i));
      }
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
