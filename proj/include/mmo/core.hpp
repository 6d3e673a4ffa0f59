#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "mmo/errors.hpp"

namespace mmo {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Box-shaped decision space.
struct Bounds {
  std::vector<double> lower;
  std::vector<double> upper;

  Bounds() = default;
  Bounds(std::vector<double> lo, std::vector<double> hi) : lower(std::move(lo)), upper(std::move(hi)) {
    if (lower.size() != upper.size()) throw ContractViolation("bounds: lower/upper length mismatch");
    for (std::size_t i = 0; i < lower.size(); ++i) {
      if (!(lower[i] < upper[i])) {
        throw ContractViolation("bounds: lower[" + std::to_string(i) + "] must be < upper");
      }
    }
  }

  static Bounds uniform(std::size_t dim, double lo, double hi) {
    return Bounds(std::vector<double>(dim, lo), std::vector<double>(dim, hi));
  }

  std::size_t dim() const noexcept { return lower.size(); }

  bool contains(std::span<const double> x) const noexcept {
    if (x.size() != dim()) return false;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] < lower[i] || x[i] > upper[i]) return false;
    }
    return true;
  }

  /// Clamps in place; returns a per-coordinate flag telling which were clamped.
  std::vector<bool> clamp(std::vector<double>& x) const {
    std::vector<bool> hit(x.size(), false);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] < lower[i]) {
        x[i] = lower[i];
        hit[i] = true;
      } else if (x[i] > upper[i]) {
        x[i] = upper[i];
        hit[i] = true;
      }
    }
    return hit;
  }

  bool operator==(const Bounds&) const = default;
};

/// A decision vector with its (minimized) objective vector. `aux` carries raw
/// floating-point objective values for problems whose objectives are binned.
struct Solution {
  std::vector<double> decision;
  std::vector<double> objectives;
  std::vector<double> aux;

  bool operator==(const Solution&) const = default;
};

using Population = std::vector<Solution>;

enum class Space { objective, decision };

/// Pareto dominance for minimization.
inline bool dominates(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractViolation("dominates: objective counts differ");
  bool strictly = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] > b[i]) return false;
    if (a[i] < b[i]) strictly = true;
  }
  return strictly;
}

inline bool dominates(const Solution& a, const Solution& b) { return dominates(a.objectives, b.objectives); }

/// Indices of the members no other member dominates, in input order.
/// Objective-space duplicates are all kept.
inline std::vector<std::size_t> non_dominated_indices(const Population& pop) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < pop.size(); ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < pop.size() && !dominated; ++j) {
      if (j != i && dominates(pop[j], pop[i])) dominated = true;
    }
    if (!dominated) keep.push_back(i);
  }
  return keep;
}

inline Population non_dominated_filter(const Population& pop) {
  Population out;
  for (std::size_t i : non_dominated_indices(pop)) out.push_back(pop[i]);
  return out;
}

/// Fast non-dominated sort. Front 0 is the non-dominated set; indices within
/// each front are ascending.
inline std::vector<std::vector<std::size_t>> non_dominated_sort(const Population& pop) {
  const std::size_t n = pop.size();
  std::vector<std::vector<std::size_t>> dominated_by_me(n);
  std::vector<std::size_t> domination_count(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (dominates(pop[i], pop[j])) {
        dominated_by_me[i].push_back(j);
        ++domination_count[j];
      } else if (dominates(pop[j], pop[i])) {
        dominated_by_me[j].push_back(i);
        ++domination_count[i];
      }
    }
  }
  std::vector<std::vector<std::size_t>> fronts;
  std::vector<std::size_t> current;
  for (std::size_t i = 0; i < n; ++i) {
    if (domination_count[i] == 0) current.push_back(i);
  }
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (std::size_t i : current) {
      for (std::size_t j : dominated_by_me[i]) {
        if (--domination_count[j] == 0) next.push_back(j);
      }
    }
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(current));
    current = std::move(next);
  }
  return fronts;
}

/// Front index of every member.
inline std::vector<std::size_t> front_ranks(const std::vector<std::vector<std::size_t>>& fronts, std::size_t n) {
  std::vector<std::size_t> rank(n, 0);
  for (std::size_t f = 0; f < fronts.size(); ++f) {
    for (std::size_t i : fronts[f]) rank[i] = f;
  }
  return rank;
}

/// Crowding distance over arbitrary points. Per coordinate: stable sort,
/// boundary members get +inf, interior members get (next - prev) / (max - min);
/// contributions are summed. A coordinate with max == min adds nothing to
/// interior members. Sets of at most two points are all infinite.
inline std::vector<double> crowding_distance(std::span<const std::vector<double>* const> points) {
  const std::size_t n = points.size();
  std::vector<double> dist(n, 0.0);
  if (n <= 2) {
    std::fill(dist.begin(), dist.end(), kInf);
    return dist;
  }
  const std::size_t dim = points[0]->size();
  std::vector<std::size_t> order(n);
  for (std::size_t c = 0; c < dim; ++c) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return (*points[a])[c] < (*points[b])[c]; });
    const double lo = (*points[order.front()])[c];
    const double hi = (*points[order.back()])[c];
    dist[order.front()] = kInf;
    dist[order.back()] = kInf;
    const double range = hi - lo;
    if (!(range > 0.0)) continue;
    for (std::size_t k = 1; k + 1 < n; ++k) {
      const std::size_t i = order[k];
      if (std::isinf(dist[i])) continue;
      dist[i] += ((*points[order[k + 1]])[c] - (*points[order[k - 1]])[c]) / range;
    }
  }
  return dist;
}

inline std::vector<double> crowding_distance(const Population& pop, Space space) {
  std::vector<const std::vector<double>*> pts;
  pts.reserve(pop.size());
  for (const auto& s : pop) pts.push_back(space == Space::objective ? &s.objectives : &s.decision);
  return crowding_distance(pts);
}

/// Crowding restricted to a subset of members; result is aligned with `subset`.
inline std::vector<double> crowding_distance(const Population& pop, std::span<const std::size_t> subset, Space space) {
  std::vector<const std::vector<double>*> pts;
  pts.reserve(subset.size());
  for (std::size_t i : subset) pts.push_back(space == Space::objective ? &pop[i].objectives : &pop[i].decision);
  return crowding_distance(pts);
}

namespace detail {

inline double finite_mean(std::span<const double> v) {
  double sum = 0.0;
  std::size_t count = 0;
  for (double x : v) {
    if (std::isfinite(x)) {
      sum += x;
      ++count;
    }
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

}  // namespace detail

/// Combines decision- and objective-space crowding: a member above the mean in
/// either space takes the larger of its two values, otherwise the smaller.
/// Infinite entries are left out of the means.
inline std::vector<double> combine_crowding(std::span<const double> cx, std::span<const double> cf) {
  if (cx.size() != cf.size()) throw ContractViolation("combine_crowding: length mismatch");
  const double mean_x = detail::finite_mean(cx);
  const double mean_f = detail::finite_mean(cf);
  std::vector<double> out(cx.size());
  for (std::size_t i = 0; i < cx.size(); ++i) {
    if (cx[i] > mean_x || cf[i] > mean_f) {
      out[i] = std::max(cx[i], cf[i]);
    } else {
      out[i] = std::min(cx[i], cf[i]);
    }
  }
  return out;
}

inline std::vector<double> special_crowding_distance(const Population& pop) {
  const auto cx = crowding_distance(pop, Space::decision);
  const auto cf = crowding_distance(pop, Space::objective);
  return combine_crowding(cx, cf);
}

inline std::vector<double> special_crowding_distance(const Population& pop, std::span<const std::size_t> subset) {
  const auto cx = crowding_distance(pop, subset, Space::decision);
  const auto cf = crowding_distance(pop, subset, Space::objective);
  return combine_crowding(cx, cf);
}

inline double euclidean(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace mmo
