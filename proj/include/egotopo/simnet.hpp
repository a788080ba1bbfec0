#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <vector>

#include "egotopo/nn.hpp"
#include "egotopo/pairgen.hpp"
#include "egotopo/types.hpp"

namespace egotopo {

// Symmetric pair feature map: [|a - b|, a .* b, (a + b) / 2]. Every component
// is invariant under swapping the inputs, so any scorer built on it is
// exactly symmetric.
nn::Mat pair_features(const nn::Mat& a, const nn::Mat& b);
nn::Vec pair_features(const nn::Vec& a, const nn::Vec& b);

// Scores the probability that two frames of a video show the same zone.
// Implementations must be symmetric in the frame arguments.
class PairScorer {
 public:
  virtual ~PairScorer() = default;
  virtual void score_pairs(const EmbeddingMatrix& video,
                           const std::vector<std::pair<int, int>>& pairs,
                           std::vector<double>& out) const = 0;
  double score_one(const EmbeddingMatrix& video, int frame_a, int frame_b) const;
};

// MLP head over the symmetric pair features, sigmoid output.
class SimilarityModel : public PairScorer {
 public:
  SimilarityModel() = default;
  SimilarityModel(int dim, int hidden, int layers);

  int dim() const { return dim_; }
  nn::Mlp& mlp() { return mlp_; }
  const nn::Mlp& mlp() const { return mlp_; }

  double score(const nn::Vec& e_a, const nn::Vec& e_b) const;
  nn::Vec score_batch(const nn::Mat& a, const nn::Mat& b) const;

  void score_pairs(const EmbeddingMatrix& video,
                   const std::vector<std::pair<int, int>>& pairs,
                   std::vector<double>& out) const override;

  void save(const std::filesystem::path& path, const std::string& extra_meta = "{}") const;
  static SimilarityModel load(const std::filesystem::path& path);

 private:
  int dim_ = 0;
  nn::Mlp mlp_;
};

// Closed-form alternative scorer: sigmoid((cosine - center) / temperature).
class CosineScorer : public PairScorer {
 public:
  CosineScorer() = default;
  CosineScorer(double center, double temperature)
      : center_(center), temperature_(temperature) {}

  void score_pairs(const EmbeddingMatrix& video,
                   const std::vector<std::pair<int, int>>& pairs,
                   std::vector<double>& out) const override;

 private:
  double center_ = 0.5;
  double temperature_ = 0.1;
};

struct SimTrainConfig {
  double lr = 1e-4;
  int epochs = 20;
  int batch_size = 256;
  std::uint64_t seed = 0;
  double val_fraction = 0.1;
  int hidden = 256;
  int layers = 5;  // weight layers, final one scalar
  double weight_decay = 0.0;
};

struct SimTrainResult {
  SimilarityModel model;
  std::vector<double> train_loss;  // per epoch
  std::vector<double> val_loss;
  std::vector<double> val_accuracy;
};

// Binary cross entropy over similar/dissimilar pairs, Adam, deterministic
// given cfg.seed. Throws UsageError when only one class is present.
SimTrainResult train_similarity(const std::vector<PairSample>& pairs,
                                const Dataset& ds, const SimTrainConfig& cfg);

}  // namespace egotopo
