#include "egotopo/anticipation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "egotopo/checkpoint.hpp"
#include "egotopo/common.hpp"
#include "json.hpp"

namespace egotopo {

using Eigen::MatrixXd;
using Eigen::VectorXd;

AnticipationVariant anticipation_variant_from_string(const std::string& name) {
  if (name == "gcn" || name == "ours") return AnticipationVariant::gcn;
  if (name == "no_gcn" || name == "ours_wo_gcn") return AnticipationVariant::no_gcn;
  if (name == "mean_pool") return AnticipationVariant::mean_pool;
  if (name == "train_dist") return AnticipationVariant::train_dist;
  throw UsageError("unknown anticipation variant: " + name +
                   " (expected gcn, no_gcn, mean_pool or train_dist)");
}

std::string to_string(AnticipationVariant v) {
  switch (v) {
    case AnticipationVariant::gcn: return "gcn";
    case AnticipationVariant::no_gcn: return "no_gcn";
    case AnticipationVariant::mean_pool: return "mean_pool";
    case AnticipationVariant::train_dist: return "train_dist";
  }
  return "?";
}

int anticipation_num_classes(const Dataset& ds, AnticipationTarget target) {
  return target == AnticipationTarget::verbs ? ds.vocab.num_verbs()
                                             : ds.vocab.num_interactions();
}

namespace {

VectorXd clip_feature(const EmbeddingMatrix& video, const ClipAnnotation& clip) {
  VectorXd f = VectorXd::Zero(video.dim);
  for (int t = clip.start_frame; t <= clip.stop_frame; ++t) f += video.frame(t);
  return f / static_cast<double>(clip.length());
}

int target_class(const ClipAnnotation& clip, const InteractionVocab& vocab,
                 AnticipationTarget target) {
  if (target == AnticipationTarget::verbs) return clip.verb_id;
  return vocab.interaction_id(clip.verb_id, clip.noun_id);
}

}  // namespace

MatrixXd anticipation_node_inputs(const EmbeddingMatrix& video, const TopoGraph& graph,
                                  const std::vector<const ClipAnnotation*>& clips,
                                  const std::vector<VectorXd>& clip_features,
                                  double clip_overlap_min) {
  const int n = static_cast<int>(graph.nodes.size());
  std::vector<int> assign_count(n, 0);
  MatrixXd inputs = MatrixXd::Zero(n, video.dim);

  // Assign each clip to the node holding the largest share of its frames,
  // when that share reaches the threshold. Ties go to the lower node id.
  for (std::size_t c = 0; c < clips.size(); ++c) {
    const ClipAnnotation& clip = *clips[c];
    double best_overlap = 0.0;
    int best_node = -1;
    for (const ZoneNode& node : graph.nodes) {
      int inside = 0;
      for (const Visit& v : node.visits) {
        int lo = std::max(clip.start_frame, v.start);
        int hi = std::min(clip.stop_frame, v.stop);
        if (hi >= lo) inside += hi - lo + 1;
      }
      double overlap = static_cast<double>(inside) / clip.length();
      if (overlap > best_overlap) {
        best_overlap = overlap;
        best_node = node.node_id;
      }
    }
    if (best_node >= 0 && best_overlap >= clip_overlap_min) {
      inputs.row(best_node) += clip_features[c].transpose();
      ++assign_count[best_node];
    }
  }

  for (const ZoneNode& node : graph.nodes) {
    int id = node.node_id;
    if (assign_count[id] > 0) {
      inputs.row(id) /= static_cast<double>(assign_count[id]);
      continue;
    }
    // Fallback: mean frame embedding over the node's visits.
    VectorXd mean = VectorXd::Zero(video.dim);
    int frames = 0;
    for (const Visit& v : node.visits)
      for (int t = v.start; t <= v.stop; ++t) {
        mean += video.frame(t);
        ++frames;
      }
    inputs.row(id) = (mean / std::max(1, frames)).transpose();
  }
  return inputs;
}

AnticipationSample build_observed_sample(const Dataset& ds, const std::string& video_id,
                                         double k_frac, const PairScorer& scorer,
                                         const BuilderConfig& builder_cfg,
                                         const AnticipationConfig& cfg) {
  const EmbeddingMatrix& video = ds.video(video_id);
  std::vector<const ClipAnnotation*> clips = ds.clips_of(video_id);
  const int M = static_cast<int>(clips.size());
  if (M < 2) throw DataError("video " + video_id + " has fewer than 2 clips");

  int k = static_cast<int>(std::floor(k_frac * M));
  k = std::max(1, std::min(k, M - 1));

  AnticipationSample sample;
  sample.video_id = video_id;
  sample.k = k;
  sample.k_frac = k_frac;

  int observed_end = clips[k - 1]->stop_frame;
  EmbeddingMatrix prefix;
  prefix.video_id = video_id;
  prefix.fps = video.fps;
  prefix.dim = video.dim;
  prefix.rows = video.rows.topRows(observed_end + 1);
  sample.observed_graph = build_graph(prefix, scorer, builder_cfg);

  std::vector<const ClipAnnotation*> observed(clips.begin(), clips.begin() + k);
  for (const ClipAnnotation* c : observed)
    sample.clip_features.push_back(clip_feature(video, *c));

  const int D = anticipation_num_classes(ds, cfg.target);
  sample.target = VectorXd::Zero(D);
  for (int i = k; i < M; ++i) {
    int cls = target_class(*clips[i], ds.vocab, cfg.target);
    EGOTOPO_CHECK(cls >= 0 && cls < D, "future clip outside target space");
    sample.target(cls) = 1.0;
  }

  sample.node_inputs = anticipation_node_inputs(video, sample.observed_graph, observed,
                                                sample.clip_features,
                                                cfg.clip_overlap_min);
  return sample;
}

MatrixXd gcn_forward(const TopoGraph& graph, const MatrixXd& x, const MatrixXd& w,
                     const VectorXd& b) {
  const int n = static_cast<int>(graph.nodes.size());
  EGOTOPO_CHECK(x.rows() == n, "gcn feature count does not match nodes");
  if (x.cols() != w.rows())
    throw UsageError("gcn weight width does not match feature width");
  MatrixXd adj = MatrixXd::Identity(n, n);  // self included
  for (const auto& [edge, count] : graph.edges) {
    adj(edge.first, edge.second) = 1.0;
    adj(edge.second, edge.first) = 1.0;
  }
  MatrixXd z = ((adj * x) * w).rowwise() + b.transpose();
  return z.cwiseMax(0.0);
}

AnticipationModel::AnticipationModel(AnticipationVariant variant, int dim, int hidden,
                                     int num_classes)
    : variant_(variant), dim_(dim), hidden_(hidden), num_classes_(num_classes) {
  switch (variant_) {
    case AnticipationVariant::gcn:
      node_mlp_ = nn::Mlp({dim, hidden, hidden});
      gcn_w_ = MatrixXd::Zero(hidden, hidden);
      gcn_b_ = VectorXd::Zero(hidden);
      head_w_ = MatrixXd::Zero(hidden, num_classes);
      head_b_ = VectorXd::Zero(num_classes);
      break;
    case AnticipationVariant::no_gcn:
      node_mlp_ = nn::Mlp({dim, hidden, hidden});
      head_w_ = MatrixXd::Zero(hidden, num_classes);
      head_b_ = VectorXd::Zero(num_classes);
      break;
    case AnticipationVariant::mean_pool:
      head_w_ = MatrixXd::Zero(dim, num_classes);
      head_b_ = VectorXd::Zero(num_classes);
      break;
    case AnticipationVariant::train_dist:
      freq_ = VectorXd::Zero(num_classes);
      break;
  }
}

int AnticipationModel::param_count() const {
  switch (variant_) {
    case AnticipationVariant::gcn:
      return node_mlp_.param_count() + static_cast<int>(gcn_w_.size()) +
             static_cast<int>(gcn_b_.size()) + static_cast<int>(head_w_.size()) +
             static_cast<int>(head_b_.size());
    case AnticipationVariant::no_gcn:
      return node_mlp_.param_count() + static_cast<int>(head_w_.size()) +
             static_cast<int>(head_b_.size());
    case AnticipationVariant::mean_pool:
      return static_cast<int>(head_w_.size()) + static_cast<int>(head_b_.size());
    case AnticipationVariant::train_dist:
      return static_cast<int>(freq_.size());
  }
  return 0;
}

VectorXd AnticipationModel::params() const {
  VectorXd theta(param_count());
  int at = 0;
  auto put = [&](const double* data, Eigen::Index size) {
    for (Eigen::Index i = 0; i < size; ++i) theta(at++) = data[i];
  };
  if (variant_ == AnticipationVariant::gcn || variant_ == AnticipationVariant::no_gcn)
    put(node_mlp_.params().data(), node_mlp_.params().size());
  if (variant_ == AnticipationVariant::gcn) {
    put(gcn_w_.data(), gcn_w_.size());
    put(gcn_b_.data(), gcn_b_.size());
  }
  if (variant_ != AnticipationVariant::train_dist) {
    put(head_w_.data(), head_w_.size());
    put(head_b_.data(), head_b_.size());
  } else {
    put(freq_.data(), freq_.size());
  }
  return theta;
}

void AnticipationModel::set_params(const VectorXd& theta) {
  EGOTOPO_CHECK(theta.size() == param_count(), "anticipation parameter size mismatch");
  int at = 0;
  auto take = [&](double* data, Eigen::Index size) {
    for (Eigen::Index i = 0; i < size; ++i) data[i] = theta(at++);
  };
  if (variant_ == AnticipationVariant::gcn || variant_ == AnticipationVariant::no_gcn)
    take(node_mlp_.params().data(), node_mlp_.params().size());
  if (variant_ == AnticipationVariant::gcn) {
    take(gcn_w_.data(), gcn_w_.size());
    take(gcn_b_.data(), gcn_b_.size());
  }
  if (variant_ != AnticipationVariant::train_dist) {
    take(head_w_.data(), head_w_.size());
    take(head_b_.data(), head_b_.size());
  } else {
    take(freq_.data(), freq_.size());
  }
}

void AnticipationModel::init_params(Rng& rng) {
  if (variant_ == AnticipationVariant::train_dist) return;
  if (variant_ != AnticipationVariant::mean_pool) node_mlp_.init_params(rng);
  if (variant_ == AnticipationVariant::gcn) {
    double scale = std::sqrt(2.0 / hidden_);
    for (Eigen::Index j = 0; j < gcn_w_.cols(); ++j)
      for (Eigen::Index i = 0; i < gcn_w_.rows(); ++i)
        gcn_w_(i, j) = scale * rng.gaussian();
    gcn_b_.setZero();
  }
  double scale = std::sqrt(2.0 / head_w_.rows());
  for (Eigen::Index j = 0; j < head_w_.cols(); ++j)
    for (Eigen::Index i = 0; i < head_w_.rows(); ++i)
      head_w_(i, j) = scale * rng.gaussian();
  head_b_.setZero();
}

namespace {

// The mean-pool baseline caps at 64 evenly sampled clip features.
constexpr int kMeanPoolClipCap = 64;

VectorXd mean_pool_feature(const AnticipationSample& sample, int max_clips) {
  EGOTOPO_CHECK(!sample.clip_features.empty(), "sample without observed clips");
  int n = static_cast<int>(sample.clip_features.size());
  std::vector<int> picks;
  if (n <= max_clips) {
    picks.resize(n);
    std::iota(picks.begin(), picks.end(), 0);
  } else {
    for (int i = 0; i < max_clips; ++i) {
      double pos = static_cast<double>(i) * (n - 1) / (max_clips - 1);
      picks.push_back(static_cast<int>(std::lround(pos)));
    }
  }
  VectorXd mean = VectorXd::Zero(sample.clip_features.front().size());
  for (int i : picks) mean += sample.clip_features[i];
  return mean / static_cast<double>(picks.size());
}

}  // namespace

VectorXd AnticipationModel::predict_logits(const AnticipationSample& sample) const {
  switch (variant_) {
    case AnticipationVariant::gcn: {
      MatrixXd h = node_mlp_.forward(sample.node_inputs);
      MatrixXd g = gcn_forward(sample.observed_graph, h, gcn_w_, gcn_b_);
      VectorXd xg = g.colwise().mean().transpose();
      return head_w_.transpose() * xg + head_b_;
    }
    case AnticipationVariant::no_gcn: {
      MatrixXd h = node_mlp_.forward(sample.node_inputs);
      VectorXd xg = h.colwise().mean().transpose();
      return head_w_.transpose() * xg + head_b_;
    }
    case AnticipationVariant::mean_pool: {
      VectorXd f = mean_pool_feature(sample, kMeanPoolClipCap);
      return head_w_.transpose() * f + head_b_;
    }
    case AnticipationVariant::train_dist:
      throw UsageError("train_dist has no logits");
  }
  throw UsageError("unknown anticipation variant");
}

VectorXd AnticipationModel::predict(const AnticipationSample& sample) const {
  if (variant_ == AnticipationVariant::train_dist) return freq_;
  if (sample.observed_graph.nodes.empty())
    throw DataError("cannot predict from an empty observed graph");
  VectorXd logits = predict_logits(sample);
  VectorXd p(logits.size());
  for (Eigen::Index i = 0; i < logits.size(); ++i) p(i) = nn::sigmoid(logits(i));
  return p;
}

double AnticipationModel::loss_and_grad(const AnticipationSample& sample,
                                        VectorXd& grad) const {
  EGOTOPO_CHECK(grad.size() == param_count(), "gradient buffer size mismatch");
  if (variant_ == AnticipationVariant::train_dist)
    throw UsageError("train_dist is not gradient-trained");

  const MatrixXd target = sample.target.transpose();

  if (variant_ == AnticipationVariant::mean_pool) {
    VectorXd f = mean_pool_feature(sample, kMeanPoolClipCap);
    MatrixXd logits = (head_w_.transpose() * f + head_b_).transpose();
    MatrixXd dlogits;
    double loss = nn::bce_with_logits(logits, target, &dlogits);
    int at = 0;
    for (Eigen::Index j = 0; j < head_w_.cols(); ++j)
      for (Eigen::Index i = 0; i < head_w_.rows(); ++i)
        grad(at++) += f(i) * dlogits(0, j);
    for (Eigen::Index j = 0; j < head_b_.size(); ++j) grad(at++) += dlogits(0, j);
    return loss;
  }

  // gcn / no_gcn share the node MLP and linear head.
  const int n = static_cast<int>(sample.observed_graph.nodes.size());
  EGOTOPO_CHECK(n > 0, "sample with empty graph");
  nn::Mlp::Cache cache;
  MatrixXd h = node_mlp_.forward(sample.node_inputs, cache);

  MatrixXd adj;
  MatrixXd g, z;
  if (variant_ == AnticipationVariant::gcn) {
    adj = MatrixXd::Identity(n, n);
    for (const auto& [edge, count] : sample.observed_graph.edges) {
      adj(edge.first, edge.second) = 1.0;
      adj(edge.second, edge.first) = 1.0;
    }
    z = ((adj * h) * gcn_w_).rowwise() + gcn_b_.transpose();
    g = z.cwiseMax(0.0);
  } else {
    g = h;
  }

  VectorXd xg = g.colwise().mean().transpose();
  MatrixXd logits = (head_w_.transpose() * xg + head_b_).transpose();
  MatrixXd dlogits;
  double loss = nn::bce_with_logits(logits, target, &dlogits);

  // Backward.
  VectorXd dxg = head_w_ * dlogits.row(0).transpose();
  MatrixXd dg = MatrixXd::Zero(n, g.cols());
  for (int i = 0; i < n; ++i) dg.row(i) = dxg.transpose() / static_cast<double>(n);

  MatrixXd dh;
  MatrixXd dgcn_w;
  VectorXd dgcn_b;
  if (variant_ == AnticipationVariant::gcn) {
    MatrixXd dz = dg.cwiseProduct((z.array() > 0.0).cast<double>().matrix());
    MatrixXd s = adj * h;
    dgcn_w = s.transpose() * dz;
    dgcn_b = dz.colwise().sum().transpose();
    dh = adj.transpose() * (dz * gcn_w_.transpose());
  } else {
    dh = dg;
  }

  VectorXd mlp_grad = VectorXd::Zero(node_mlp_.param_count());
  node_mlp_.backward(cache, dh, mlp_grad);

  int at = 0;
  for (Eigen::Index i = 0; i < mlp_grad.size(); ++i) grad(at++) += mlp_grad(i);
  if (variant_ == AnticipationVariant::gcn) {
    for (Eigen::Index j = 0; j < dgcn_w.cols(); ++j)
      for (Eigen::Index i = 0; i < dgcn_w.rows(); ++i) grad(at++) += dgcn_w(i, j);
    for (Eigen::Index i = 0; i < dgcn_b.size(); ++i) grad(at++) += dgcn_b(i);
  }
  for (Eigen::Index j = 0; j < head_w_.cols(); ++j)
    for (Eigen::Index i = 0; i < head_w_.rows(); ++i)
      grad(at++) += xg(i) * dlogits(0, j);
  for (Eigen::Index j = 0; j < head_b_.size(); ++j) grad(at++) += dlogits(0, j);
  return loss;
}

void AnticipationModel::fit_train_dist(const std::vector<std::string>& train_videos,
                                       const Dataset& ds, AnticipationTarget target) {
  EGOTOPO_CHECK(variant_ == AnticipationVariant::train_dist,
                "fit_train_dist on a trained variant");
  freq_.setZero();
  if (train_videos.empty()) return;
  for (const auto& id : train_videos) {
    std::set<int> present;
    for (const ClipAnnotation* a : ds.clips_of(id))
      present.insert(target_class(*a, ds.vocab, target));
    for (int cls : present) freq_(cls) += 1.0;
  }
  freq_ /= static_cast<double>(train_videos.size());
}

void AnticipationModel::save(const std::filesystem::path& path,
                             const std::string& extra_meta) const {
  nlohmann::json meta = nlohmann::json::parse(extra_meta);
  meta["kind"] = "anticipation";
  meta["schema_version"] = kSchemaVersion;
  meta["variant"] = to_string(variant_);
  meta["dim"] = dim_;
  meta["hidden"] = hidden_;
  meta["num_classes"] = num_classes_;
  save_checkpoint({meta.dump(), params()}, path);
}

AnticipationModel AnticipationModel::load(const std::filesystem::path& path) {
  Checkpoint ckpt = load_checkpoint(path);
  nlohmann::json meta = nlohmann::json::parse(ckpt.meta_json);
  if (meta.at("kind").get<std::string>() != "anticipation")
    throw DataError("checkpoint is not an anticipation model: " + path.string());
  AnticipationModel m(anticipation_variant_from_string(meta.at("variant")),
                      meta.at("dim").get<int>(), meta.at("hidden").get<int>(),
                      meta.at("num_classes").get<int>());
  if (m.param_count() != ckpt.params.size())
    throw DataError("checkpoint parameter count mismatch: " + path.string());
  m.set_params(ckpt.params);
  return m;
}

AnticipationTrainResult train_anticipation(const std::vector<AnticipationSample>& samples,
                                           const Dataset& ds,
                                           const AnticipationConfig& cfg) {
  if (samples.empty()) throw UsageError("no anticipation training samples");
  if (cfg.variant == AnticipationVariant::train_dist)
    throw UsageError("train_dist is fitted, not trained; use fit_train_dist");
  const int D = static_cast<int>(samples.front().target.size());

  Rng rng(cfg.seed);
  AnticipationTrainResult res;
  res.model = AnticipationModel(cfg.variant, ds.dim(), cfg.hidden, D);
  res.model.init_params(rng);

  nn::AdamConfig acfg;
  acfg.lr = cfg.lr;
  acfg.weight_decay = cfg.weight_decay;
  nn::Adam opt(res.model.param_count(), acfg);

  std::vector<int> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  VectorXd theta = res.model.params();
  VectorXd grad(res.model.param_count());

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (epoch == cfg.decay_epoch) opt.set_lr(cfg.lr * cfg.lr_decay_factor);
    rng.shuffle(order);
    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t lo = 0; lo < order.size(); lo += cfg.batch_size) {
      std::size_t hi = std::min(lo + cfg.batch_size, order.size());
      grad.setZero();
      double batch_loss = 0.0;
      for (std::size_t i = lo; i < hi; ++i)
        batch_loss += res.model.loss_and_grad(samples[order[i]], grad);
      double count = static_cast<double>(hi - lo);
      grad /= count;
      opt.step(theta, grad);
      res.model.set_params(theta);
      epoch_loss += batch_loss / count;
      ++batches;
    }
    res.train_loss.push_back(epoch_loss / std::max(1, batches));
  }
  return res;
}

AnticipationEvalResult eval_anticipation(const AnticipationModel& model,
                                         const std::vector<std::string>& eval_videos,
                                         const Dataset& ds, const PairScorer& scorer,
                                         const BuilderConfig& builder_cfg,
                                         const AnticipationConfig& cfg,
                                         const EvalSplit& split) {
  AnticipationEvalResult out;
  std::vector<MapResult> results;
  for (double k_frac : cfg.horizons) {
    std::vector<VectorXd> scores_rows, gt_rows;
    for (const auto& id : eval_videos) {
      AnticipationSample sample =
          build_observed_sample(ds, id, k_frac, scorer, builder_cfg, cfg);
      scores_rows.push_back(model.predict(sample));
      gt_rows.push_back(sample.target);
    }
    MatrixXd scores(scores_rows.size(), scores_rows.front().size());
    MatrixXd gt(gt_rows.size(), gt_rows.front().size());
    for (std::size_t i = 0; i < scores_rows.size(); ++i) {
      scores.row(static_cast<Eigen::Index>(i)) = scores_rows[i].transpose();
      gt.row(static_cast<Eigen::Index>(i)) = gt_rows[i].transpose();
    }
    MapResult r = eval_map(scores, gt, split);
    std::string key = "k" + std::to_string(static_cast<int>(std::lround(k_frac * 100)));
    out.per_horizon[key] = r;
    results.push_back(r);
  }

  // Horizon-averaged summary (means of the defined per-horizon values).
  auto mean_of = [&](auto get) -> std::optional<double> {
    double sum = 0.0;
    int n = 0;
    for (const auto& r : results) {
      auto v = get(r);
      if (!v) continue;
      sum += *v;
      ++n;
    }
    if (n == 0) return std::nullopt;
    return sum / n;
  };
  out.mean.all = mean_of([](const MapResult& r) { return r.all; });
  out.mean.freq = mean_of([](const MapResult& r) { return r.freq; });
  out.mean.rare = mean_of([](const MapResult& r) { return r.rare; });
  return out;
}

}  // namespace egotopo
