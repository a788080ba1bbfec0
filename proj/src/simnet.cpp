#include "egotopo/simnet.hpp"

#include <algorithm>
#include <numeric>

#include "egotopo/checkpoint.hpp"
#include "egotopo/common.hpp"
#include "json.hpp"

namespace egotopo {

using nn::Mat;
using nn::Vec;

Mat pair_features(const Mat& a, const Mat& b) {
  EGOTOPO_CHECK(a.rows() == b.rows() && a.cols() == b.cols(),
                "pair feature shape mismatch");
  Mat f(a.rows(), 3 * a.cols());
  f.leftCols(a.cols()) = (a - b).cwiseAbs();
  f.middleCols(a.cols(), a.cols()) = a.cwiseProduct(b);
  f.rightCols(a.cols()) = 0.5 * (a + b);
  return f;
}

Vec pair_features(const Vec& a, const Vec& b) {
  EGOTOPO_CHECK(a.size() == b.size(), "pair feature dimension mismatch");
  Vec f(3 * a.size());
  f.head(a.size()) = (a - b).cwiseAbs();
  f.segment(a.size(), a.size()) = a.cwiseProduct(b);
  f.tail(a.size()) = 0.5 * (a + b);
  return f;
}

double PairScorer::score_one(const EmbeddingMatrix& video, int frame_a,
                             int frame_b) const {
  std::vector<double> out(1);
  score_pairs(video, {{frame_a, frame_b}}, out);
  return out[0];
}

SimilarityModel::SimilarityModel(int dim, int hidden, int layers) : dim_(dim) {
  if (dim < 1 || hidden < 1 || layers < 1)
    throw UsageError("similarity model dims must be positive");
  std::vector<int> widths;
  widths.push_back(3 * dim);
  for (int l = 0; l < layers - 1; ++l) widths.push_back(hidden);
  widths.push_back(1);
  mlp_ = nn::Mlp(widths);
}

double SimilarityModel::score(const Vec& e_a, const Vec& e_b) const {
  if (e_a.size() != dim_ || e_b.size() != dim_)
    throw UsageError("embedding dimension mismatch in score_pair");
  Mat f = pair_features(e_a, e_b).transpose();
  return nn::sigmoid(mlp_.forward(f)(0, 0));
}

Vec SimilarityModel::score_batch(const Mat& a, const Mat& b) const {
  Mat logits = mlp_.forward(pair_features(a, b));
  Vec out(logits.rows());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) out(i) = nn::sigmoid(logits(i, 0));
  return out;
}

void SimilarityModel::score_pairs(const EmbeddingMatrix& video,
                                  const std::vector<std::pair<int, int>>& pairs,
                                  std::vector<double>& out) const {
  EGOTOPO_CHECK(video.dim == dim_, "video dimension does not match model");
  out.resize(pairs.size());
  if (pairs.empty()) return;
  Mat a(pairs.size(), dim_), b(pairs.size(), dim_);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    a.row(static_cast<Eigen::Index>(i)) = video.rows.row(pairs[i].first).cast<double>();
    b.row(static_cast<Eigen::Index>(i)) = video.rows.row(pairs[i].second).cast<double>();
  }
  Vec s = score_batch(a, b);
  for (std::size_t i = 0; i < pairs.size(); ++i) out[i] = s(static_cast<Eigen::Index>(i));
}

void SimilarityModel::save(const std::filesystem::path& path,
                           const std::string& extra_meta) const {
  nlohmann::json meta = nlohmann::json::parse(extra_meta);
  meta["kind"] = "simnet";
  meta["schema_version"] = kSchemaVersion;
  meta["dim"] = dim_;
  meta["widths"] = mlp_.widths();
  save_checkpoint({meta.dump(), mlp_.params()}, path);
}

SimilarityModel SimilarityModel::load(const std::filesystem::path& path) {
  Checkpoint ckpt = load_checkpoint(path);
  nlohmann::json meta = nlohmann::json::parse(ckpt.meta_json);
  if (meta.at("kind").get<std::string>() != "simnet")
    throw DataError("checkpoint is not a similarity model: " + path.string());
  SimilarityModel m;
  m.dim_ = meta.at("dim").get<int>();
  m.mlp_ = nn::Mlp(meta.at("widths").get<std::vector<int>>());
  if (m.mlp_.param_count() != ckpt.params.size())
    throw DataError("checkpoint parameter count mismatch: " + path.string());
  m.mlp_.params() = ckpt.params;
  return m;
}

void CosineScorer::score_pairs(const EmbeddingMatrix& video,
                               const std::vector<std::pair<int, int>>& pairs,
                               std::vector<double>& out) const {
  out.resize(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    Vec a = video.frame(pairs[i].first);
    Vec b = video.frame(pairs[i].second);
    double na = a.norm(), nb = b.norm();
    double cos = (na == 0.0 || nb == 0.0) ? 0.0 : a.dot(b) / (na * nb);
    out[i] = nn::sigmoid((cos - center_) / temperature_);
  }
}

SimTrainResult train_similarity(const std::vector<PairSample>& pairs,
                                const Dataset& ds, const SimTrainConfig& cfg) {
  if (pairs.empty()) throw UsageError("no training pairs");
  if (cfg.lr <= 0 || cfg.epochs <= 0 || cfg.batch_size <= 0 ||
      cfg.val_fraction < 0 || cfg.val_fraction >= 1)
    throw UsageError("invalid similarity training config");
  int n_pos = 0, n_neg = 0;
  for (const auto& p : pairs) (p.label == PairLabel::similar ? n_pos : n_neg)++;
  if (n_pos == 0 || n_neg == 0)
    throw UsageError("similarity training needs both similar and dissimilar pairs");

  const int dim = ds.dim();
  const int n = static_cast<int>(pairs.size());
  Mat a(n, dim), b(n, dim);
  Mat y(n, 1);
  for (int i = 0; i < n; ++i) {
    const auto& p = pairs[i];
    a.row(i) = ds.video(p.video_a).rows.row(p.frame_a).cast<double>();
    b.row(i) = ds.video(p.video_b).rows.row(p.frame_b).cast<double>();
    y(i, 0) = p.label == PairLabel::similar ? 1.0 : 0.0;
  }
  Mat x = pair_features(a, b);

  Rng rng(cfg.seed);
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  int n_val = static_cast<int>(cfg.val_fraction * n);
  std::vector<int> val_idx(order.begin(), order.begin() + n_val);
  std::vector<int> train_idx(order.begin() + n_val, order.end());
  if (train_idx.empty()) throw UsageError("validation fraction leaves no training pairs");

  SimTrainResult res;
  res.model = SimilarityModel(dim, cfg.hidden, cfg.layers);
  nn::Mlp& mlp = res.model.mlp();
  mlp.init_params(rng);

  nn::AdamConfig acfg;
  acfg.lr = cfg.lr;
  acfg.weight_decay = cfg.weight_decay;
  nn::Adam opt(mlp.param_count(), acfg);

  auto gather = [&](const std::vector<int>& idx, int lo, int hi, Mat& xb, Mat& yb) {
    xb.resize(hi - lo, x.cols());
    yb.resize(hi - lo, 1);
    for (int i = lo; i < hi; ++i) {
      xb.row(i - lo) = x.row(idx[i]);
      yb.row(i - lo) = y.row(idx[i]);
    }
  };

  Vec grad(mlp.param_count());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(train_idx);
    double epoch_loss = 0.0;
    int batches = 0;
    for (int lo = 0; lo < static_cast<int>(train_idx.size()); lo += cfg.batch_size) {
      int hi = std::min<int>(lo + cfg.batch_size, static_cast<int>(train_idx.size()));
      Mat xb, yb;
      gather(train_idx, lo, hi, xb, yb);
      nn::Mlp::Cache cache;
      Mat logits = mlp.forward(xb, cache);
      Mat dlogits;
      epoch_loss += nn::bce_with_logits(logits, yb, &dlogits);
      grad.setZero();
      mlp.backward(cache, dlogits, grad);
      opt.step(mlp.params(), grad);
      ++batches;
    }
    res.train_loss.push_back(epoch_loss / std::max(1, batches));

    if (!val_idx.empty()) {
      Mat xv, yv;
      gather(val_idx, 0, static_cast<int>(val_idx.size()), xv, yv);
      Mat logits = mlp.forward(xv);
      res.val_loss.push_back(nn::bce_with_logits(logits, yv, nullptr));
      int correct = 0;
      for (Eigen::Index i = 0; i < logits.rows(); ++i)
        correct += ((logits(i, 0) > 0.0) == (yv(i, 0) > 0.5));
      res.val_accuracy.push_back(static_cast<double>(correct) /
                                 static_cast<double>(logits.rows()));
    }
  }
  return res;
}

}  // namespace egotopo
