#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "mmo/errors.hpp"
#include "mmo/random.hpp"

namespace mmo {

using FeatureMask = std::vector<bool>;

/// Row-major sample matrix with integer class labels in [0, class_count).
struct TabularDataset {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> samples;
  std::vector<std::size_t> labels;
  std::size_t class_count = 0;

  TabularDataset() = default;

  TabularDataset(std::size_t n, std::size_t d, std::vector<double> x, std::vector<std::size_t> y, std::size_t classes)
      : rows(n), cols(d), samples(std::move(x)), labels(std::move(y)), class_count(classes) {
    validate();
  }

  void validate() const {
    if (rows < 2) throw ContractViolation("dataset needs at least 2 samples");
    if (cols < 1) throw ContractViolation("dataset needs at least 1 feature");
    if (samples.size() != rows * cols) throw ContractViolation("dataset matrix size mismatch");
    if (labels.size() != rows) throw ContractViolation("dataset label count mismatch");
    for (double v : samples) {
      if (std::isnan(v)) throw ContractViolation("dataset contains NaN features");
    }
    for (std::size_t y : labels) {
      if (y >= class_count) throw ContractViolation("dataset label out of range");
    }
  }

  std::span<const double> row(std::size_t i) const { return {samples.data() + i * cols, cols}; }

  /// Copy of the listed rows, in the listed order.
  TabularDataset subset(std::span<const std::size_t> idx) const {
    TabularDataset out;
    out.rows = idx.size();
    out.cols = cols;
    out.class_count = class_count;
    out.samples.reserve(idx.size() * cols);
    for (std::size_t i : idx) {
      auto r = row(i);
      out.samples.insert(out.samples.end(), r.begin(), r.end());
      out.labels.push_back(labels[i]);
    }
    return out;
  }

  bool operator==(const TabularDataset&) const = default;
};

/// Assignment of each sample to one of `fold_count` folds.
struct FoldPlan {
  std::vector<std::size_t> fold_of_sample;
  std::size_t fold_count = 0;

  /// Seeded shuffle, then round-robin assignment: fold sizes differ by at most one.
  static FoldPlan make(std::size_t n, std::size_t folds, std::uint64_t seed) {
    if (folds < 2 || folds > n) throw ContractViolation("fold count must lie in [2, n]");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    RandomStream rng(seed);
    rng.shuffle(order);
    FoldPlan plan;
    plan.fold_count = folds;
    plan.fold_of_sample.assign(n, 0);
    for (std::size_t pos = 0; pos < n; ++pos) plan.fold_of_sample[order[pos]] = pos % folds;
    return plan;
  }

  bool operator==(const FoldPlan&) const = default;
};

inline std::vector<std::size_t> selected_features(const FeatureMask& mask) {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < mask.size(); ++j) {
    if (mask[j]) out.push_back(j);
  }
  return out;
}

namespace detail {

/// Majority vote over the k nearest training rows measured on `features`.
/// Distance ties keep the lower training index; vote ties go to the smallest class.
inline std::size_t knn_vote(std::span<const double> train, std::size_t stride, std::span<const std::size_t> train_labels,
                            std::span<const double> query, std::span<const std::size_t> features, std::size_t k,
                            std::size_t class_count, std::vector<std::pair<double, std::size_t>>& scratch) {
  const std::size_t n = train_labels.size();
  scratch.clear();
  scratch.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* r = train.data() + i * stride;
    double s = 0.0;
    for (std::size_t f : features) {
      const double d = r[f] - query[f];
      s += d * d;
    }
    scratch.emplace_back(s, i);
  }
  const std::size_t kk = std::min(k, n);
  std::partial_sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(kk), scratch.end());
  std::vector<std::size_t> votes(class_count, 0);
  for (std::size_t t = 0; t < kk; ++t) ++votes[train_labels[scratch[t].second]];
  std::size_t best = 0;
  for (std::size_t c = 1; c < class_count; ++c) {
    if (votes[c] > votes[best]) best = c;
  }
  return best;
}

}  // namespace detail

/// KNN over masked features of already-scaled data. `train` is row-major with
/// `query.size()` columns.
inline std::size_t knn_classify(std::span<const double> train, std::span<const std::size_t> train_labels,
                                std::span<const double> query, std::size_t k, const FeatureMask& mask) {
  if (train_labels.empty()) throw ContractViolation("knn_classify: no training samples");
  if (k == 0) throw ContractViolation("knn_classify: k must be positive");
  if (mask.size() != query.size()) throw ContractViolation("knn_classify: mask length differs from feature count");
  if (train.size() != train_labels.size() * query.size()) throw ContractViolation("knn_classify: training matrix shape");
  const auto features = selected_features(mask);
  if (features.empty()) throw ContractViolation("knn_classify: empty feature mask");
  const std::size_t classes = *std::max_element(train_labels.begin(), train_labels.end()) + 1;
  std::vector<std::pair<double, std::size_t>> scratch;
  return detail::knn_vote(train, query.size(), train_labels, query, features, k, classes, scratch);
}

/// Pooled k-fold error rate: each fold is classified by the other folds, with
/// min-max scaling fitted on the training folds only.
inline double cv_error_rate(const TabularDataset& ds, const FeatureMask& mask, std::size_t k, const FoldPlan& plan) {
  if (mask.size() != ds.cols) throw ContractViolation("cv_error_rate: mask length differs from feature count");
  if (plan.fold_of_sample.size() != ds.rows) throw ContractViolation("cv_error_rate: fold plan size mismatch");
  if (k == 0) throw ContractViolation("cv_error_rate: k must be positive");
  const auto features = selected_features(mask);
  if (features.empty()) throw ContractViolation("cv_error_rate: empty feature mask");

  const std::size_t d = ds.cols;
  std::size_t wrong = 0;
  std::vector<double> train;
  std::vector<std::size_t> train_labels;
  std::vector<double> lo(d), scale(d);
  std::vector<double> query(d, 0.0);
  std::vector<std::pair<double, std::size_t>> scratch;

  for (std::size_t fold = 0; fold < plan.fold_count; ++fold) {
    train.clear();
    train_labels.clear();
    for (std::size_t f : features) {
      lo[f] = std::numeric_limits<double>::infinity();
      scale[f] = -std::numeric_limits<double>::infinity();
    }
    for (std::size_t i = 0; i < ds.rows; ++i) {
      if (plan.fold_of_sample[i] == fold) continue;
      auto r = ds.row(i);
      for (std::size_t f : features) {
        lo[f] = std::min(lo[f], r[f]);
        scale[f] = std::max(scale[f], r[f]);
      }
    }
    for (std::size_t f : features) {
      const double range = scale[f] - lo[f];
      scale[f] = range > 0.0 ? 1.0 / range : 0.0;
    }
    for (std::size_t i = 0; i < ds.rows; ++i) {
      if (plan.fold_of_sample[i] == fold) continue;
      auto r = ds.row(i);
      const std::size_t base = train.size();
      train.resize(base + d, 0.0);
      for (std::size_t f : features) train[base + f] = (r[f] - lo[f]) * scale[f];
      train_labels.push_back(ds.labels[i]);
    }
    for (std::size_t i = 0; i < ds.rows; ++i) {
      if (plan.fold_of_sample[i] != fold) continue;
      auto r = ds.row(i);
      for (std::size_t f : features) query[f] = (r[f] - lo[f]) * scale[f];
      const std::size_t predicted =
          detail::knn_vote(train, d, train_labels, query, features, k, ds.class_count, scratch);
      if (predicted != ds.labels[i]) ++wrong;
    }
  }
  return static_cast<double>(wrong) / static_cast<double>(ds.rows);
}

}  // namespace mmo
