#include "egotopo/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "egotopo/common.hpp"

namespace egotopo {

EvalSplit EvalSplit::from_counts(const std::vector<int>& train_counts, int freq_min,
                                 int rare_max) {
  EvalSplit s;
  for (std::size_t k = 0; k < train_counts.size(); ++k) {
    s.all_classes.push_back(static_cast<int>(k));
    if (train_counts[k] > freq_min) s.freq_classes.push_back(static_cast<int>(k));
    if (train_counts[k] < rare_max) s.rare_classes.push_back(static_cast<int>(k));
  }
  return s;
}

double average_precision(const std::vector<double>& scores,
                         const std::vector<int>& labels) {
  EGOTOPO_CHECK(scores.size() == labels.size(), "ap input size mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  int positives = 0;
  for (int l : labels) positives += (l != 0);
  if (positives == 0) return 0.0;
  double sum_prec = 0.0;
  int tp = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (labels[order[rank]] != 0) {
      ++tp;
      sum_prec += static_cast<double>(tp) / static_cast<double>(rank + 1);
    }
  }
  return sum_prec / positives;
}

namespace {

std::optional<double> split_mean(const std::map<int, double>& per_class,
                                 const std::vector<int>& classes) {
  double sum = 0.0;
  int n = 0;
  for (int c : classes) {
    auto it = per_class.find(c);
    if (it == per_class.end()) continue;
    sum += it->second;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / n;
}

}  // namespace

MapResult eval_map(const Eigen::MatrixXd& scores, const Eigen::MatrixXd& gt,
                   const EvalSplit& split) {
  EGOTOPO_CHECK(scores.rows() == gt.rows() && scores.cols() == gt.cols(),
                "eval_map shape mismatch");
  MapResult r;
  for (int c : split.all_classes) {
    EGOTOPO_CHECK(c >= 0 && c < scores.cols(), "split class out of range");
    std::vector<double> s(scores.rows());
    std::vector<int> l(scores.rows());
    int pos = 0;
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
      s[i] = scores(i, c);
      l[i] = gt(i, c) != 0.0 ? 1 : 0;
      pos += l[i];
    }
    if (pos == 0) continue;  // class absent from the eval set
    r.per_class[c] = average_precision(s, l);
  }
  r.all = split_mean(r.per_class, split.all_classes);
  r.freq = split_mean(r.per_class, split.freq_classes);
  r.rare = split_mean(r.per_class, split.rare_classes);
  return r;
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  EGOTOPO_CHECK(a.size() == b.size(), "ari input size mismatch");
  const std::size_t n = a.size();
  if (n == 0) return 1.0;
  std::map<int, int> amap, bmap;
  for (int x : a) amap.emplace(x, static_cast<int>(amap.size()));
  for (int x : b) bmap.emplace(x, static_cast<int>(bmap.size()));
  std::vector<std::vector<long long>> table(amap.size(),
                                            std::vector<long long>(bmap.size(), 0));
  for (std::size_t i = 0; i < n; ++i) ++table[amap[a[i]]][bmap[b[i]]];

  auto choose2 = [](long long m) { return m * (m - 1) / 2; };
  long long sum_ij = 0, sum_a = 0, sum_b = 0;
  std::vector<long long> rows(amap.size(), 0), cols(bmap.size(), 0);
  for (std::size_t i = 0; i < table.size(); ++i)
    for (std::size_t j = 0; j < table[i].size(); ++j) {
      sum_ij += choose2(table[i][j]);
      rows[i] += table[i][j];
      cols[j] += table[i][j];
    }
  for (long long r : rows) sum_a += choose2(r);
  for (long long c : cols) sum_b += choose2(c);
  double total = static_cast<double>(choose2(static_cast<long long>(n)));
  double expected = static_cast<double>(sum_a) * static_cast<double>(sum_b) / total;
  double maximum = 0.5 * static_cast<double>(sum_a + sum_b);
  if (maximum == expected) return 1.0;  // both partitions trivial
  return (static_cast<double>(sum_ij) - expected) / (maximum - expected);
}

double cluster_purity(const std::vector<int>& cluster, const std::vector<int>& truth) {
  EGOTOPO_CHECK(cluster.size() == truth.size(), "purity input size mismatch");
  if (cluster.empty()) return 1.0;
  std::map<int, std::map<int, int>> counts;
  for (std::size_t i = 0; i < cluster.size(); ++i) ++counts[cluster[i]][truth[i]];
  long long correct = 0;
  for (const auto& [c, hist] : counts) {
    int best = 0;
    for (const auto& [t, k] : hist) best = std::max(best, k);
    correct += best;
  }
  return static_cast<double>(correct) / static_cast<double>(cluster.size());
}

}  // namespace egotopo
