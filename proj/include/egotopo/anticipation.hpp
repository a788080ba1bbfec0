#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "egotopo/metrics.hpp"
#include "egotopo/nn.hpp"
#include "egotopo/simnet.hpp"
#include "egotopo/topo.hpp"
#include "egotopo/types.hpp"

namespace egotopo {

enum class AnticipationVariant { gcn, no_gcn, mean_pool, train_dist };
enum class AnticipationTarget { verbs, interactions };

AnticipationVariant anticipation_variant_from_string(const std::string& name);
std::string to_string(AnticipationVariant v);

struct AnticipationConfig {
  int hidden = 64;                 // node MLP output width = GCN width
  double lr = 1e-3;
  double lr_decay_factor = 0.1;    // applied once at decay_epoch
  int decay_epoch = 80;
  int epochs = 100;
  int batch_size = 256;
  double weight_decay = 1e-5;
  std::vector<double> horizons = {0.25, 0.50, 0.75};
  double clip_overlap_min = 0.5;   // clip-to-node assignment threshold
  AnticipationVariant variant = AnticipationVariant::gcn;
  AnticipationTarget target = AnticipationTarget::verbs;
  std::uint64_t seed = 0;
};

struct AnticipationSample {
  std::string video_id;
  int k = 0;            // observed clip count
  double k_frac = 0.0;
  TopoGraph observed_graph;
  std::vector<Eigen::VectorXd> clip_features;  // observed clips, time order
  Eigen::VectorXd target;                      // D-dim binary, future actions
  Eigen::MatrixXd node_inputs;                 // per node: mean assigned clip
                                               // feature, or mean visit frame
};

// Builds the observed-prefix sample for one video at one horizon. The graph
// covers frames up to the end of clip k where k = floor(k_frac * M), clamped
// to [1, M-1]. Throws DataError when the video has fewer than 2 clips.
AnticipationSample build_observed_sample(const Dataset& ds, const std::string& video_id,
                                         double k_frac, const PairScorer& scorer,
                                         const BuilderConfig& builder_cfg,
                                         const AnticipationConfig& cfg);

// Mean feature of the clips assigned to the node (>= clip_overlap_min of the
// clip's frames inside the node's visits; ties to the larger overlap, then
// the lower node id), or the mean frame embedding of the node's visits when
// no clip is assigned.
Eigen::MatrixXd anticipation_node_inputs(const EmbeddingMatrix& video,
                                         const TopoGraph& graph,
                                         const std::vector<const ClipAnnotation*>& clips,
                                         const std::vector<Eigen::VectorXd>& clip_features,
                                         double clip_overlap_min);

// One graph-convolution update: g_n = relu(sum over neighbors-and-self of
// W^T x + b). Neighbors are undirected traversal edges.
Eigen::MatrixXd gcn_forward(const TopoGraph& graph, const Eigen::MatrixXd& x,
                            const Eigen::MatrixXd& w, const Eigen::VectorXd& b);

class AnticipationModel {
 public:
  AnticipationModel() = default;
  AnticipationModel(AnticipationVariant variant, int dim, int hidden, int num_classes);

  AnticipationVariant variant() const { return variant_; }
  int num_classes() const { return num_classes_; }

  int param_count() const;
  Eigen::VectorXd params() const;
  void set_params(const Eigen::VectorXd& theta);
  void init_params(Rng& rng);

  // Per-class scores (probabilities for the trained variants, raw action
  // frequencies for train_dist).
  Eigen::VectorXd predict(const AnticipationSample& sample) const;

  // Adds dLoss/dparams of the BCE between the prediction and sample.target
  // into grad; returns the loss. Not defined for train_dist.
  double loss_and_grad(const AnticipationSample& sample, Eigen::VectorXd& grad) const;

  void fit_train_dist(const std::vector<std::string>& train_videos, const Dataset& ds,
                      AnticipationTarget target);

  void save(const std::filesystem::path& path, const std::string& extra_meta = "{}") const;
  static AnticipationModel load(const std::filesystem::path& path);

 private:
  Eigen::VectorXd predict_logits(const AnticipationSample& sample) const;

  AnticipationVariant variant_ = AnticipationVariant::gcn;
  int dim_ = 0;
  int hidden_ = 0;
  int num_classes_ = 0;
  nn::Mlp node_mlp_;        // {dim, hidden, hidden}
  Eigen::MatrixXd gcn_w_;   // hidden x hidden
  Eigen::VectorXd gcn_b_;   // hidden
  Eigen::MatrixXd head_w_;  // head input x classes
  Eigen::VectorXd head_b_;  // classes
  Eigen::VectorXd freq_;    // train_dist scores

  friend struct AnticipationModelAccess;
};

struct AnticipationTrainResult {
  AnticipationModel model;
  std::vector<double> train_loss;
};

AnticipationTrainResult train_anticipation(const std::vector<AnticipationSample>& samples,
                                           const Dataset& ds,
                                           const AnticipationConfig& cfg);

struct AnticipationEvalResult {
  std::map<std::string, MapResult> per_horizon;  // keys "k25", "k50", "k75"
  MapResult mean;                                // averaged over horizons
};

AnticipationEvalResult eval_anticipation(const AnticipationModel& model,
                                         const std::vector<std::string>& eval_videos,
                                         const Dataset& ds, const PairScorer& scorer,
                                         const BuilderConfig& builder_cfg,
                                         const AnticipationConfig& cfg,
                                         const EvalSplit& split);

int anticipation_num_classes(const Dataset& ds, AnticipationTarget target);

}  // namespace egotopo
