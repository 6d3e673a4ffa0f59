#include <catch_amalgamated.hpp>

#include "mmo/classifier.hpp"
#include "mmo/random.hpp"
#include "oracles.hpp"

using namespace mmo;

namespace {

TabularDataset random_dataset(std::size_t n, std::size_t d, std::size_t classes, std::uint64_t seed) {
  RandomStream rng(seed);
  std::vector<double> x(n * d);
  std::vector<std::size_t> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = i < classes ? i : rng.below(classes);
    for (std::size_t j = 0; j < d; ++j) x[i * d + j] = rng.uniform(-3.0, 3.0) + (j % 2 ? 0.8 * static_cast<double>(y[i]) : 0.0);
  }
  return TabularDataset(n, d, std::move(x), std::move(y), classes);
}

}  // namespace

TEST_CASE("knn_classify") {
  const FeatureMask one{true};
  SECTION("single training sample decides") {
    const std::vector<double> train{0.0};
    const std::vector<std::size_t> labels{3};
    CHECK(knn_classify(train, labels, std::vector<double>{42.0}, 5, one) == 3);
  }
  SECTION("exact match with k = 1") {
    const std::vector<double> train{0.0, 5.0, 9.0};
    const std::vector<std::size_t> labels{0, 1, 2};
    CHECK(knn_classify(train, labels, std::vector<double>{5.0}, 1, one) == 1);
  }
  SECTION("majority of five neighbours") {
    // A = 0, B = 1
    const std::vector<double> train{0, 1, 10, 11, 12};
    const std::vector<std::size_t> labels{0, 0, 1, 1, 1};
    CHECK(knn_classify(train, labels, std::vector<double>{9.0}, 5, one) == 1);
  }
  SECTION("vote ties go to the smallest class") {
    const std::vector<double> train{-1, 1};
    const std::vector<std::size_t> labels{1, 0};
    CHECK(knn_classify(train, labels, std::vector<double>{0.0}, 2, one) == 0);
  }
  SECTION("masked-out features are ignored") {
    const std::vector<double> train{0, 100, 10, 0};
    const std::vector<std::size_t> labels{0, 1};
    CHECK(knn_classify(train, labels, std::vector<double>{0.5, 0.0}, 1, FeatureMask{true, false}) == 0);
    CHECK(knn_classify(train, labels, std::vector<double>{0.5, 0.0}, 1, FeatureMask{false, true}) == 1);
  }
  SECTION("contract violations") {
    const std::vector<double> train{0.0};
    const std::vector<std::size_t> labels{0};
    CHECK_THROWS_AS(knn_classify(train, labels, std::vector<double>{0.0}, 0, one), ContractViolation);
    CHECK_THROWS_AS(knn_classify(train, labels, std::vector<double>{0.0}, 1, FeatureMask{false}), ContractViolation);
  }
}

TEST_CASE("fold plans") {
  const auto plan = FoldPlan::make(23, 5, 99);
  std::vector<std::size_t> sizes(5, 0);
  for (auto f : plan.fold_of_sample) ++sizes[f];
  CHECK(*std::max_element(sizes.begin(), sizes.end()) - *std::min_element(sizes.begin(), sizes.end()) <= 1);
  CHECK(plan == FoldPlan::make(23, 5, 99));
  CHECK_FALSE(plan == FoldPlan::make(23, 5, 100));
  CHECK_THROWS_AS(FoldPlan::make(3, 5, 1), ContractViolation);
}

TEST_CASE("cross-validated error") {
  SECTION("well separated clusters") {
    std::vector<double> x;
    std::vector<std::size_t> y;
    for (int i = 0; i < 20; ++i) {
      x.push_back(i % 2 ? 100.0 + i * 0.1 : i * 0.1);
      y.push_back(static_cast<std::size_t>(i % 2));
    }
    const TabularDataset ds(20, 1, x, y, 2);
    CHECK(cv_error_rate(ds, FeatureMask{true}, 5, FoldPlan::make(20, 5, 3)) == 0.0);
  }
  SECTION("single label") {
    const TabularDataset ds(10, 2, std::vector<double>(20, 1.5), std::vector<std::size_t>(10, 0), 1);
    CHECK(cv_error_rate(ds, FeatureMask{true, true}, 5, FoldPlan::make(10, 5, 3)) == 0.0);
  }
  SECTION("matches the hand-loop oracle") {
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
      const std::size_t n = seed == 1 ? 20 : 20 + seed * 7;
      const auto ds = random_dataset(n, 6, 2 + seed % 3, seed);
      const auto plan = FoldPlan::make(n, 5, seed + 100);
      RandomStream rng(seed);
      for (int m = 0; m < 8; ++m) {
        FeatureMask mask(6);
        for (std::size_t j = 0; j < 6; ++j) mask[j] = rng.below(2) == 1;
        if (std::none_of(mask.begin(), mask.end(), [](bool b) { return b; })) mask[m % 6] = true;
        for (std::size_t k : {1u, 3u, 5u}) CHECK(cv_error_rate(ds, mask, k, plan) == oracle::cv_error(ds, mask, k, plan));
      }
    }
  }
  SECTION("empty mask is a contract violation") {
    const auto ds = random_dataset(20, 3, 2, 5);
    CHECK_THROWS_AS(cv_error_rate(ds, FeatureMask(3, false), 5, FoldPlan::make(20, 5, 1)), ContractViolation);
  }
}

TEST_CASE("dataset invariants") {
  CHECK_THROWS_AS(TabularDataset(2, 1, {0.0, 1.0}, {0, 2}, 2), ContractViolation);
  CHECK_THROWS_AS(TabularDataset(2, 1, {0.0}, {0, 1}, 2), ContractViolation);
  const TabularDataset ds(3, 2, {1, 2, 3, 4, 5, 6}, {0, 1, 0}, 2);
  const std::vector<std::size_t> idx{2, 0};
  const auto sub = ds.subset(idx);
  CHECK(sub.samples == std::vector<double>{5, 6, 1, 2});
  CHECK(sub.labels == std::vector<std::size_t>{0, 0});
}
