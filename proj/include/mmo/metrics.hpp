#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmo/core.hpp"
#include "mmo/errors.hpp"
#include "mmo/problems.hpp"

namespace mmo {

// ---------------------------------------------------------------------------
// Hypervolume (two objectives)

/// Area dominated by `points` and bounded by `ref`, minimization. Points not
/// strictly better than `ref` in both objectives add nothing.
inline double hypervolume_2d(std::span<const std::array<double, 2>> points, std::array<double, 2> ref = {1.0, 1.0}) {
  std::vector<std::array<double, 2>> pts;
  pts.reserve(points.size());
  for (const auto& p : points) {
    if (p[0] < ref[0] && p[1] < ref[1]) pts.push_back(p);
  }
  if (pts.empty()) return 0.0;
  std::sort(pts.begin(), pts.end());
  double area = 0.0;
  double ceiling = ref[1];
  for (const auto& p : pts) {
    if (p[1] < ceiling) {
      area += (ref[0] - p[0]) * (ceiling - p[1]);
      ceiling = p[1];
    }
  }
  return area;
}

inline std::vector<std::array<double, 2>> objective_pairs(const Population& pop) {
  std::vector<std::array<double, 2>> out;
  out.reserve(pop.size());
  for (const auto& s : pop) {
    if (s.objectives.size() != 2) throw ContractViolation("hypervolume is defined for two objectives only");
    out.push_back({s.objectives[0], s.objectives[1]});
  }
  return out;
}

inline double hypervolume_2d(const Population& pop, std::array<double, 2> ref = {1.0, 1.0}) {
  const auto pts = objective_pairs(pop);
  return hypervolume_2d(std::span<const std::array<double, 2>>(pts), ref);
}

/// Reciprocal hypervolume; +inf when nothing is dominated.
inline double inv_hv(std::span<const std::array<double, 2>> points, std::array<double, 2> ref = {1.0, 1.0}) {
  const double hv = hypervolume_2d(points, ref);
  return hv > 0.0 ? 1.0 / hv : kInf;
}

inline double inv_hv(const Population& pop, std::array<double, 2> ref = {1.0, 1.0}) {
  const auto pts = objective_pairs(pop);
  return inv_hv(std::span<const std::array<double, 2>>(pts), ref);
}

// ---------------------------------------------------------------------------
// IGD / IGDX

/// Per-coordinate affine map onto [0, 1]. Coordinates with zero range are
/// shifted but not scaled.
struct Normalizer {
  std::vector<double> lower;
  std::vector<double> upper;

  static Normalizer identity(std::size_t dim) { return {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)}; }

  static Normalizer fit(std::span<const std::vector<double>> points) {
    if (points.empty()) throw ContractViolation("normalizer needs at least one point");
    Normalizer n{points.front(), points.front()};
    for (const auto& p : points) {
      if (p.size() != n.lower.size()) throw ContractViolation("normalizer: ragged points");
      for (std::size_t i = 0; i < p.size(); ++i) {
        n.lower[i] = std::min(n.lower[i], p[i]);
        n.upper[i] = std::max(n.upper[i], p[i]);
      }
    }
    return n;
  }

  std::size_t dim() const noexcept { return lower.size(); }

  std::vector<double> apply(std::span<const double> p) const {
    if (p.size() != dim()) throw ContractViolation("normalizer: dimension mismatch");
    std::vector<double> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double range = upper[i] - lower[i];
      out[i] = range > 0.0 ? (p[i] - lower[i]) / range : p[i] - lower[i];
    }
    return out;
  }

  bool operator==(const Normalizer&) const = default;
};

/// Mean over reference points of the distance to the nearest solution, after
/// normalizing both sets with `norm`. Serves IGDX (decision space) and IGD
/// (objective space) alike.
inline double inverted_generational_distance(std::span<const std::vector<double>> solutions,
                                             std::span<const std::vector<double>> reference, const Normalizer& norm) {
  if (solutions.empty()) throw ContractViolation("IGD: solution set is empty");
  if (reference.empty()) throw ContractViolation("IGD: reference set is empty");
  std::vector<std::vector<double>> sol;
  sol.reserve(solutions.size());
  for (const auto& s : solutions) sol.push_back(norm.apply(s));
  double total = 0.0;
  for (const auto& r : reference) {
    const auto y = norm.apply(r);
    double best = kInf;
    for (const auto& x : sol) {
      double s2 = 0.0;
      for (std::size_t i = 0; i < y.size(); ++i) {
        const double d = x[i] - y[i];
        s2 += d * d;
        if (s2 >= best) break;
      }
      best = std::min(best, s2);
    }
    total += std::sqrt(best);
  }
  return total / static_cast<double>(reference.size());
}

/// Reference points for IGDX / IGD with the normalization ranges of each space.
struct ReferenceSet {
  std::string dataset;
  std::size_t grid_n = 0;
  std::vector<std::vector<double>> s_dec;
  std::vector<std::vector<double>> s_obj;
  Normalizer dec_norm;
  Normalizer obj_norm;

  void fit_normalizers() {
    dec_norm = Normalizer::fit(s_dec);
    obj_norm = Normalizer::fit(s_obj);
  }

  bool operator==(const ReferenceSet&) const = default;
};

inline double igdx(const Population& archive, const ReferenceSet& ref) {
  std::vector<std::vector<double>> xs;
  xs.reserve(archive.size());
  for (const auto& s : archive) xs.push_back(s.decision);
  return inverted_generational_distance(xs, ref.s_dec, ref.dec_norm);
}

/// Measured on the raw objective values when the archive carries them.
inline double igd(const Population& archive, const ReferenceSet& ref) {
  std::vector<std::vector<double>> fs;
  fs.reserve(archive.size());
  for (const auto& s : archive) fs.push_back(s.aux.empty() ? s.objectives : s.aux);
  return inverted_generational_distance(fs, ref.s_obj, ref.obj_norm);
}

// ---------------------------------------------------------------------------
// Equivalent feature subsets

/// Distinct masks grouped by objective vector (f1 within 1e-12, f2 exact);
/// each group of k masks contributes k - 1.
inline std::size_t equivalent_subset_count(const Population& archive) {
  std::map<FeatureMask, std::array<double, 2>> distinct;
  for (const auto& s : archive) {
    if (s.objectives.size() != 2) throw ContractViolation("equivalent_subset_count: expects two objectives");
    distinct.emplace(decode_feature_mask(s.decision), std::array<double, 2>{s.objectives[0], s.objectives[1]});
  }
  std::vector<std::array<double, 2>> objs;
  objs.reserve(distinct.size());
  for (const auto& [mask, f] : distinct) objs.push_back(f);
  std::sort(objs.begin(), objs.end(), [](const auto& a, const auto& b) {
    return a[1] != b[1] ? a[1] < b[1] : a[0] < b[0];
  });
  std::size_t count = 0;
  for (std::size_t i = 1; i < objs.size(); ++i) {
    if (objs[i][1] == objs[i - 1][1] && std::abs(objs[i][0] - objs[i - 1][0]) <= 1e-12) ++count;
  }
  return count;
}

// ---------------------------------------------------------------------------
// Reference sets

/// Grid sampling of the decision square, restricted to the disk. Non-domination
/// is decided on the interval objectives; `s_obj` keeps the raw distances.
inline ReferenceSet build_location_reference(const LocationInstance& inst, std::size_t grid_n = 300) {
  if (grid_n < 2) throw ContractViolation("reference grid needs at least 2 points per axis");
  inst.validate();
  const Bounds box = inst.decision_bounds();
  struct Cell {
    Point2 p;
    Evaluation e;
  };
  std::vector<Cell> cells;
  cells.reserve(grid_n * grid_n);
  const double step_x = (box.upper[0] - box.lower[0]) / static_cast<double>(grid_n - 1);
  const double step_y = (box.upper[1] - box.lower[1]) / static_cast<double>(grid_n - 1);
  for (std::size_t i = 0; i < grid_n; ++i) {
    for (std::size_t j = 0; j < grid_n; ++j) {
      const Point2 p{box.lower[0] + step_x * static_cast<double>(i), box.lower[1] + step_y * static_cast<double>(j)};
      if (distance(p, inst.center) > inst.radius) continue;
      cells.push_back({p, evaluate_location(inst, p)});
    }
  }
  if (cells.empty()) throw ContractViolation("reference grid has no point inside the disk");

  // Interval objectives take few distinct values, so filter those instead of the points.
  std::map<std::vector<double>, bool> classes;
  for (const auto& c : cells) classes.emplace(c.e.objectives, true);
  std::vector<const std::vector<double>*> keys;
  for (auto& [k, nd] : classes) keys.push_back(&k);
  for (auto& [k, nd] : classes) {
    for (const auto* other : keys) {
      if (dominates(*other, k)) {
        nd = false;
        break;
      }
    }
  }

  ReferenceSet ref;
  ref.dataset = inst.name;
  ref.grid_n = grid_n;
  for (const auto& c : cells) {
    if (!classes.at(c.e.objectives)) continue;
    ref.s_dec.push_back({c.p.x, c.p.y});
    ref.s_obj.push_back(c.e.aux);
  }
  ref.fit_normalizers();
  return ref;
}

/// Analytic Pareto set / front of the synthetic problem: `per_branch` points on
/// each of the two segments x2 = 0.5.
inline ReferenceSet synthetic_reference(std::size_t per_branch = 500) {
  if (per_branch < 2) throw ContractViolation("synthetic reference needs at least 2 points per branch");
  ReferenceSet ref;
  ref.dataset = "synthetic";
  const double n = static_cast<double>(per_branch);
  for (std::size_t i = 0; i < per_branch; ++i) {
    const double t = static_cast<double>(i) / (n - 1.0);
    ref.s_dec.push_back({t, 0.5});
    ref.s_obj.push_back({t, 1.0 - std::sqrt(t)});
  }
  for (std::size_t i = 0; i < per_branch; ++i) {
    const double t = static_cast<double>(i + 1) / n;
    ref.s_dec.push_back({1.0 + t, 0.5});
    ref.s_obj.push_back({t, 1.0 - std::sqrt(t)});
  }
  ref.fit_normalizers();
  return ref;
}

/// Indicator values for one archive; fields not applicable to the problem stay empty.
struct MetricReport {
  std::optional<double> inv_hv;
  std::optional<std::size_t> equivalent_count;
  std::optional<double> igdx;
  std::optional<double> igd;

  bool operator==(const MetricReport&) const = default;
};

}  // namespace mmo
