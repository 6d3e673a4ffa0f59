#pragma once

#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mmo/classifier.hpp"
#include "mmo/core.hpp"
#include "mmo/errors.hpp"

namespace mmo {

enum class ProblemKind { feature_selection, location_selection, synthetic_two_ps };

inline std::string_view to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::feature_selection: return "feature_selection";
    case ProblemKind::location_selection: return "location_selection";
    case ProblemKind::synthetic_two_ps: return "synthetic";
  }
  return "?";
}

struct ProblemSpec {
  std::size_t dim = 0;
  std::size_t objectives = 0;
  Bounds bounds;
  ProblemKind kind = ProblemKind::synthetic_two_ps;
};

/// Objective vector plus optional raw (unbinned) values.
struct Evaluation {
  std::vector<double> objectives;
  std::vector<double> aux;
};

/// Counts objective evaluations against a hard cap.
class EvaluationBudget {
 public:
  explicit EvaluationBudget(std::size_t max = 20000) : max_(max) {
    if (max == 0) throw ConfigError("evaluation budget must be positive");
  }

  std::size_t used() const noexcept { return used_; }
  std::size_t max() const noexcept { return max_; }
  std::size_t remaining() const noexcept { return max_ - used_; }
  bool exhausted() const noexcept { return used_ >= max_; }

  void charge() {
    if (exhausted()) throw BudgetExhausted();
    ++used_;
  }

 private:
  std::size_t used_ = 0;
  std::size_t max_;
};

/// What the algorithms need from a problem. `evaluate` is free of budget
/// accounting; see `Evaluator` for the charged path.
template <class P>
concept MultiobjectiveProblem = requires(const P& p, std::span<const double> x, std::vector<double>& y) {
  { p.spec() } -> std::convertible_to<const ProblemSpec&>;
  { p.evaluate(x) } -> std::same_as<Evaluation>;
  { p.repair(y) };
};

// ---------------------------------------------------------------------------
// Feature selection

/// Gene j selects feature j iff it is strictly above one half.
inline FeatureMask decode_feature_mask(std::span<const double> x) {
  FeatureMask mask(x.size(), false);
  for (std::size_t j = 0; j < x.size(); ++j) mask[j] = x[j] > 0.5;
  return mask;
}

/// Wrapper feature selection: minimize (KNN cross-validated error, selected fraction).
/// Objective vectors are memoized per mask; an instance belongs to one run.
class FeatureSelectionProblem {
 public:
  FeatureSelectionProblem(std::shared_ptr<const TabularDataset> train, FoldPlan plan, std::size_t k = 5)
      : data_(std::move(train)), plan_(std::move(plan)), k_(k) {
    if (!data_) throw ContractViolation("feature selection needs a dataset");
    if (plan_.fold_of_sample.size() != data_->rows) throw ContractViolation("fold plan does not match dataset");
    if (k_ == 0) throw ContractViolation("k must be positive");
    spec_ = {data_->cols, 2, Bounds::uniform(data_->cols, 0.0, 1.0), ProblemKind::feature_selection};
  }

  /// Builds the usual 5-fold plan from a seed.
  static FeatureSelectionProblem with_folds(std::shared_ptr<const TabularDataset> train, std::uint64_t fold_seed,
                                            std::size_t k = 5, std::size_t folds = 5) {
    auto plan = FoldPlan::make(train->rows, folds, fold_seed);
    return FeatureSelectionProblem(std::move(train), std::move(plan), k);
  }

  const ProblemSpec& spec() const noexcept { return spec_; }
  const TabularDataset& dataset() const noexcept { return *data_; }
  const FoldPlan& folds() const noexcept { return plan_; }
  std::size_t k() const noexcept { return k_; }

  std::array<double, 2> objectives_of(const FeatureMask& mask) const {
    auto it = cache_.find(mask);
    if (it != cache_.end()) return it->second;
    std::size_t selected = 0;
    for (bool b : mask) selected += b ? 1 : 0;
    std::array<double, 2> f{1.0, 0.0};
    if (selected > 0) {
      f = {cv_error_rate(*data_, mask, k_, plan_), static_cast<double>(selected) / static_cast<double>(mask.size())};
    }
    cache_.emplace(mask, f);
    return f;
  }

  Evaluation evaluate(std::span<const double> x) const {
    if (x.size() != spec_.dim) throw ContractViolation("feature selection: decision length mismatch");
    const auto f = objectives_of(decode_feature_mask(x));
    return {{f[0], f[1]}, {}};
  }

  void repair(std::vector<double>& x) const { spec_.bounds.clamp(x); }

 private:
  std::shared_ptr<const TabularDataset> data_;
  FoldPlan plan_;
  std::size_t k_;
  ProblemSpec spec_;
  mutable std::map<FeatureMask, std::array<double, 2>> cache_;
};

// ---------------------------------------------------------------------------
// Location selection

enum class FacilityType : std::size_t { primary_school = 0, middle_school = 1, shopping_center = 2, subway_station = 3 };

inline constexpr std::array<FacilityType, 4> kFacilityTypes = {
    FacilityType::primary_school, FacilityType::middle_school, FacilityType::shopping_center,
    FacilityType::subway_station};

inline std::string_view to_string(FacilityType t) {
  switch (t) {
    case FacilityType::primary_school: return "primary_school";
    case FacilityType::middle_school: return "middle_school";
    case FacilityType::shopping_center: return "shopping_center";
    case FacilityType::subway_station: return "subway_station";
  }
  return "?";
}

inline bool parse_facility_type(std::string_view s, FacilityType& out) {
  for (FacilityType t : kFacilityTypes) {
    if (to_string(t) == s) {
      out = t;
      return true;
    }
  }
  return false;
}

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

inline constexpr double kIntervalWidth = 500.0;
inline constexpr int kIntervalCount = 12;
inline constexpr double kDefaultRadius = 3000.0;

/// A central place and the typed facilities around it, in planar meters.
struct LocationInstance {
  std::string name;
  Point2 center;
  double radius = kDefaultRadius;
  std::array<std::vector<Point2>, 4> facilities;

  const std::vector<Point2>& of(FacilityType t) const { return facilities[static_cast<std::size_t>(t)]; }
  std::vector<Point2>& of(FacilityType t) { return facilities[static_cast<std::size_t>(t)]; }

  /// Throws SchemaError on an empty facility type or a facility outside the radius.
  void validate() const {
    if (!(radius > 0.0)) throw SchemaError("location instance radius must be positive");
    for (FacilityType t : kFacilityTypes) {
      const auto& pts = of(t);
      if (pts.empty()) throw SchemaError("location instance has no " + std::string(to_string(t)));
      for (std::size_t i = 0; i < pts.size(); ++i) {
        // a hair of slack for coordinates that went through a projection
        if (distance(pts[i], center) > radius * (1.0 + 1e-12)) {
          throw SchemaError(std::string(to_string(t)) + " #" + std::to_string(i) + " lies outside the radius");
        }
      }
    }
  }

  Bounds decision_bounds() const {
    return Bounds({center.x - radius, center.y - radius}, {center.x + radius, center.y + radius});
  }

  bool operator==(const LocationInstance&) const = default;
};

/// Maps a distance in meters to its 500 m interval value 1..12. The last
/// interval is closed, and anything beyond it is clamped to 12.
inline int distance_to_interval_value(double meters) {
  if (!(meters >= 0.0)) throw ContractViolation("distance must be non-negative");
  const double bin = std::floor(meters / kIntervalWidth);
  if (bin >= kIntervalCount - 1) return kIntervalCount;
  return static_cast<int>(bin) + 1;
}

/// Pulls a point outside the disk back onto its boundary along the ray from the center.
inline Point2 repair_to_region(const LocationInstance& inst, Point2 p) {
  const double r = distance(p, inst.center);
  if (r <= inst.radius) return p;
  const double s = inst.radius / r;
  return {inst.center.x + (p.x - inst.center.x) * s, inst.center.y + (p.y - inst.center.y) * s};
}

/// Objective order: primary school, middle school, shopping center, subway station.
inline Evaluation evaluate_location(const LocationInstance& inst, Point2 p) {
  Evaluation e;
  e.objectives.reserve(4);
  e.aux.reserve(4);
  for (FacilityType t : kFacilityTypes) {
    double best = kInf;
    for (const Point2& q : inst.of(t)) best = std::min(best, distance(p, q));
    e.aux.push_back(best);
    e.objectives.push_back(static_cast<double>(distance_to_interval_value(best)));
  }
  return e;
}

class LocationProblem {
 public:
  explicit LocationProblem(std::shared_ptr<const LocationInstance> inst) : inst_(std::move(inst)) {
    if (!inst_) throw ContractViolation("location problem needs an instance");
    inst_->validate();
    spec_ = {2, 4, inst_->decision_bounds(), ProblemKind::location_selection};
  }

  const ProblemSpec& spec() const noexcept { return spec_; }
  const LocationInstance& instance() const noexcept { return *inst_; }

  Evaluation evaluate(std::span<const double> x) const {
    if (x.size() != 2) throw ContractViolation("location: decision must be a planar point");
    return evaluate_location(*inst_, {x[0], x[1]});
  }

  void repair(std::vector<double>& x) const {
    spec_.bounds.clamp(x);
    const Point2 p = repair_to_region(*inst_, {x[0], x[1]});
    x[0] = p.x;
    x[1] = p.y;
  }

 private:
  std::shared_ptr<const LocationInstance> inst_;
  ProblemSpec spec_;
};

// ---------------------------------------------------------------------------
// Synthetic problem with two Pareto sets mapping onto one front

/// f1 = t, f2 = 1 - sqrt(t) + 2 (x2 - 0.5)^2 with t = x1 on [0, 1] and
/// t = x1 - 1 on (1, 2]. Both segments x2 = 0.5 are Pareto optimal.
inline std::array<double, 2> evaluate_synthetic(double x1, double x2) {
  const double t = x1 <= 1.0 ? x1 : x1 - 1.0;
  const double dx = x2 - 0.5;
  return {t, 1.0 - std::sqrt(t) + 2.0 * dx * dx};
}

class SyntheticTwoPsProblem {
 public:
  SyntheticTwoPsProblem() : spec_{2, 2, Bounds::uniform(2, 0.0, 2.0), ProblemKind::synthetic_two_ps} {}

  const ProblemSpec& spec() const noexcept { return spec_; }

  Evaluation evaluate(std::span<const double> x) const {
    if (x.size() != 2) throw ContractViolation("synthetic: decision must have two components");
    const auto f = evaluate_synthetic(x[0], x[1]);
    return {{f[0], f[1]}, {}};
  }

  void repair(std::vector<double>& x) const { spec_.bounds.clamp(x); }

 private:
  ProblemSpec spec_;
};

static_assert(MultiobjectiveProblem<FeatureSelectionProblem>);
static_assert(MultiobjectiveProblem<LocationProblem>);
static_assert(MultiobjectiveProblem<SyntheticTwoPsProblem>);

/// Charges the budget for every evaluation and produces Solutions.
template <MultiobjectiveProblem P>
class Evaluator {
 public:
  Evaluator(const P& problem, EvaluationBudget& budget) : problem_(problem), budget_(budget) {}

  const P& problem() const noexcept { return problem_; }
  const EvaluationBudget& budget() const noexcept { return budget_; }
  std::size_t remaining() const noexcept { return budget_.remaining(); }

  Solution operator()(std::vector<double> x) {
    budget_.charge();
    Evaluation e = problem_.evaluate(x);
    return {std::move(x), std::move(e.objectives), std::move(e.aux)};
  }

 private:
  const P& problem_;
  EvaluationBudget& budget_;
};

/// Charged feature-subset evaluation.
inline std::array<double, 2> evaluate_feature_subset(const FeatureSelectionProblem& p, std::span<const double> x,
                                                     EvaluationBudget& budget) {
  budget.charge();
  const auto e = p.evaluate(x);
  return {e.objectives[0], e.objectives[1]};
}

/// Charged location evaluation.
inline Evaluation evaluate_location(const LocationInstance& inst, Point2 p, EvaluationBudget& budget) {
  budget.charge();
  return evaluate_location(inst, p);
}

}  // namespace mmo
