#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <numeric>

#include "egotopo/metrics.hpp"
#include "egotopo/rng.hpp"

using namespace egotopo;

namespace {

// Brute-force average precision: walk every rank position and recount the
// positives among the top-k by rescanning, exactly as the precision/recall
// definition reads. Ties resolved by original index, as in the library.
double brute_force_ap(const std::vector<double>& scores, const std::vector<int>& labels) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  int total_pos = 0;
  for (int l : labels) total_pos += (l != 0);
  if (total_pos == 0) return 0.0;
  double ap = 0.0;
  for (std::size_t k = 1; k <= order.size(); ++k) {
    if (labels[order[k - 1]] == 0) continue;
    int tp = 0;
    for (std::size_t i = 0; i < k; ++i) tp += (labels[order[i]] != 0);
    ap += static_cast<double>(tp) / static_cast<double>(k);
  }
  return ap / total_pos;
}

}  // namespace

TEST_CASE("average precision basics") {
  SUBCASE("perfect ranking gives 1.0") {
    CHECK(average_precision({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0}) == doctest::Approx(1.0));
  }

  SUBCASE("worked three-item example") {
    // ranking: 0.9 (pos), 0.8 (neg), 0.1 (pos) -> (1/1 + 2/3) / 2
    CHECK(average_precision({0.9, 0.8, 0.1}, {1, 0, 1}) ==
          doctest::Approx((1.0 + 2.0 / 3.0) / 2.0).epsilon(1e-12));
  }

  SUBCASE("all-negative returns 0") {
    CHECK(average_precision({0.5, 0.4}, {0, 0}) == 0.0);
  }
}

TEST_CASE("eval_map equals the brute-force oracle on random instances") {
  Rng rng(77);
  for (int trial = 0; trial < 1000; ++trial) {
    int n = rng.uniform_int(1, 20);
    int classes = rng.uniform_int(1, 8);
    Eigen::MatrixXd scores(n, classes), gt(n, classes);
    for (int i = 0; i < n; ++i)
      for (int c = 0; c < classes; ++c) {
        scores(i, c) = rng.uniform();
        gt(i, c) = rng.uniform() < 0.4 ? 1.0 : 0.0;
      }
    EvalSplit split;
    for (int c = 0; c < classes; ++c) split.all_classes.push_back(c);
    MapResult r = eval_map(scores, gt, split);

    double oracle_sum = 0.0;
    int oracle_n = 0;
    for (int c = 0; c < classes; ++c) {
      std::vector<double> s(n);
      std::vector<int> l(n);
      int pos = 0;
      for (int i = 0; i < n; ++i) {
        s[i] = scores(i, c);
        l[i] = gt(i, c) != 0.0;
        pos += l[i];
      }
      if (pos == 0) continue;
      double ap = brute_force_ap(s, l);
      REQUIRE(r.per_class.count(c) == 1);
      CHECK(std::abs(r.per_class.at(c) - ap) <= 1e-9);
      oracle_sum += ap;
      ++oracle_n;
    }
    if (oracle_n == 0) {
      CHECK(!r.all.has_value());
    } else {
      CHECK(std::abs(*r.all - oracle_sum / oracle_n) <= 1e-9);
    }
  }
}

TEST_CASE("eval splits follow the training-count thresholds") {
  std::vector<int> counts = {150, 5, 50, 101, 9, 10, 100};
  EvalSplit s = EvalSplit::from_counts(counts);
  CHECK(s.all_classes == std::vector<int>{0, 1, 2, 3, 4, 5, 6});
  CHECK(s.freq_classes == std::vector<int>{0, 3});   // > 100
  CHECK(s.rare_classes == std::vector<int>{1, 4});   // < 10

  SUBCASE("split without positives is reported absent") {
    Eigen::MatrixXd scores(3, 2), gt(3, 2);
    scores << 0.9, 0.1, 0.8, 0.2, 0.7, 0.3;
    gt << 1, 0, 0, 0, 1, 0;  // class 1 has no positives
    EvalSplit split;
    split.all_classes = {0, 1};
    split.rare_classes = {1};
    MapResult r = eval_map(scores, gt, split);
    CHECK(r.all.has_value());
    CHECK(!r.rare.has_value());
  }
}

TEST_CASE("adjusted rand index") {
  SUBCASE("identical partitions score 1") {
    CHECK(adjusted_rand_index({0, 0, 1, 1, 2}, {5, 5, 7, 7, 9}) == doctest::Approx(1.0));
  }

  SUBCASE("independent partitions score near 0") {
    Rng rng(3);
    std::vector<int> a(2000), b(2000);
    for (int i = 0; i < 2000; ++i) {
      a[i] = rng.uniform_int(0, 3);
      b[i] = rng.uniform_int(0, 3);
    }
    CHECK(std::abs(adjusted_rand_index(a, b)) < 0.05);
  }

  SUBCASE("label permutation does not matter") {
    std::vector<int> a = {0, 0, 1, 1, 2, 2};
    std::vector<int> b = {2, 2, 0, 0, 1, 1};
    CHECK(adjusted_rand_index(a, b) == doctest::Approx(1.0));
  }
}

TEST_CASE("cluster purity") {
  CHECK(cluster_purity({0, 0, 1, 1}, {5, 5, 6, 6}) == doctest::Approx(1.0));
  CHECK(cluster_purity({0, 0, 0, 0}, {1, 1, 2, 2}) == doctest::Approx(0.5));
  CHECK(cluster_purity({0, 0, 1, 1}, {1, 2, 1, 2}) == doctest::Approx(0.5));
}
