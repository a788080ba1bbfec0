#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "egotopo/linker.hpp"
#include "egotopo/metrics.hpp"
#include "egotopo/nn.hpp"
#include "egotopo/topo.hpp"
#include "egotopo/types.hpp"

namespace egotopo {

struct AffordanceTargets {
  Eigen::VectorXd y;     // A-dim binary indicator
  Eigen::VectorXd mask;  // 1 = class supervised
  enum class Source { node_level, clip_level };
  Source source = Source::node_level;
};

// Union of the interactions of every annotation overlapping any visit of the
// node; mask all ones.
AffordanceTargets node_affordance_labels(const ZoneNode& node,
                                         const std::vector<const ClipAnnotation*>& anns,
                                         const InteractionVocab& vocab);

// Cluster labels are the union over member nodes.
AffordanceTargets cluster_affordance_labels(const Cluster& cluster, const Dataset& ds);

enum class AffordanceVariant { S, M, C, ClipAction, KMeans };

AffordanceVariant affordance_variant_from_string(const std::string& name);
std::string to_string(AffordanceVariant v);

struct AffordanceSample {
  std::string video_id;
  int frame = 0;
  AffordanceTargets targets;
};

struct AffordanceSetOptions {
  LinkConfig link;       // used by M and C
  int kmeans_k = 0;      // 0 = cluster count of the consolidated graph
  int kmeans_iters = 50;
  std::uint64_t seed = 0;
};

// One sample per visit (center frame) with node- or cluster-level targets for
// S / M / C; one sample per clip for ClipAction (single-class mask) and
// KMeans (visual-cluster union targets). Graphs must cover the training
// videos referenced by train_video_ids.
std::vector<AffordanceSample> build_affordance_training_set(
    AffordanceVariant variant, const Dataset& ds,
    const std::vector<TopoGraph>& graphs,
    const std::vector<std::string>& train_video_ids,
    const AffordanceSetOptions& opts);

struct AffordanceTrainConfig {
  double lr = 1e-4;
  double lr_final = 1e-5;   // after anneal_epoch
  int anneal_epoch = 15;
  int epochs = 20;
  int batch_size = 256;
  double weight_decay = 1e-6;
  int hidden = 512;
  std::uint64_t seed = 0;
};

class AffordanceModel {
 public:
  AffordanceModel() = default;
  AffordanceModel(int dim, int hidden, int num_classes);

  nn::Mlp& mlp() { return mlp_; }
  const nn::Mlp& mlp() const { return mlp_; }
  int num_classes() const { return mlp_.output_width(); }

  // Rows of features are frame embeddings; returns per-class probabilities.
  Eigen::MatrixXd predict(const Eigen::MatrixXd& features) const;

  void save(const std::filesystem::path& path, const std::string& extra_meta = "{}") const;
  static AffordanceModel load(const std::filesystem::path& path);

 private:
  nn::Mlp mlp_;  // {dim, hidden, hidden, A}
};

struct AffordanceTrainResult {
  AffordanceModel model;
  std::vector<double> train_loss;
};

// Masked binary cross entropy, Adam with the learning rate annealed once.
AffordanceTrainResult train_affordance(const std::vector<AffordanceSample>& samples,
                                       const Dataset& ds,
                                       const AffordanceTrainConfig& cfg);

// Per-interaction training instance counts (clip level) over the given videos.
std::vector<int> interaction_train_counts(const Dataset& ds,
                                          const std::vector<std::string>& video_ids);
std::vector<int> verb_train_counts(const Dataset& ds,
                                   const std::vector<std::string>& video_ids);

// Lloyd k-means with seeded k-means++ initialization; returns assignments.
std::vector<int> kmeans_assign(const Eigen::MatrixXd& points, int k, int iters,
                               std::uint64_t seed);

}  // namespace egotopo
