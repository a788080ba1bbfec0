#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace egotopo {

// Class-frequency splits for reporting. Thresholds follow the evaluation
// protocol: frequent = more than freq_min training instances, rare = fewer
// than rare_max.
struct EvalSplit {
  std::vector<int> all_classes;
  std::vector<int> freq_classes;
  std::vector<int> rare_classes;

  static EvalSplit from_counts(const std::vector<int>& train_counts,
                               int freq_min = 100, int rare_max = 10);
};

struct MapResult {
  std::optional<double> all;   // absent when no class in the split has a positive
  std::optional<double> freq;
  std::optional<double> rare;
  std::map<int, double> per_class;  // classes with at least one positive
};

// Average precision of one ranking: precision summed at each positive rank,
// divided by the number of positives. Ties are broken by original index so
// the value is deterministic.
double average_precision(const std::vector<double>& scores,
                         const std::vector<int>& labels);

// scores, gt: num_samples x num_classes. Classes without any positive in gt
// are excluded from every mean.
MapResult eval_map(const Eigen::MatrixXd& scores, const Eigen::MatrixXd& gt,
                   const EvalSplit& split);

// Adjusted Rand Index between two labelings of the same items.
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b);

// Fraction of items whose cluster's majority ground-truth label matches.
double cluster_purity(const std::vector<int>& cluster, const std::vector<int>& truth);

}  // namespace egotopo
