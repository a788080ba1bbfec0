#include "egotopo/affordance.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <set>

#include "egotopo/checkpoint.hpp"
#include "egotopo/common.hpp"
#include "egotopo/rng.hpp"
#include "json.hpp"

namespace egotopo {

using nn::Mat;
using nn::Vec;

namespace {

bool overlaps(const ClipAnnotation& a, const Visit& v) {
  return a.start_frame <= v.stop && a.stop_frame >= v.start;
}

}  // namespace

AffordanceTargets node_affordance_labels(const ZoneNode& node,
                                         const std::vector<const ClipAnnotation*>& anns,
                                         const InteractionVocab& vocab) {
  AffordanceTargets t;
  t.y = Vec::Zero(vocab.num_interactions());
  t.mask = Vec::Ones(vocab.num_interactions());
  t.source = AffordanceTargets::Source::node_level;
  for (const ClipAnnotation* a : anns) {
    for (const Visit& v : node.visits)
      if (overlaps(*a, v)) {
        int k = vocab.interaction_id(a->verb_id, a->noun_id);
        EGOTOPO_CHECK(k >= 0, "annotation outside interaction vocab");
        t.y(k) = 1.0;
        break;
      }
  }
  return t;
}

AffordanceTargets cluster_affordance_labels(const Cluster& cluster, const Dataset& ds) {
  AffordanceTargets t;
  t.y = Vec::Zero(ds.vocab.num_interactions());
  t.mask = Vec::Ones(ds.vocab.num_interactions());
  t.source = AffordanceTargets::Source::node_level;
  for (const ClusterVisit& cv : cluster.visits) {
    for (const ClipAnnotation* a : ds.clips_of(cv.video_id))
      if (overlaps(*a, cv.visit)) {
        int k = ds.vocab.interaction_id(a->verb_id, a->noun_id);
        EGOTOPO_CHECK(k >= 0, "annotation outside interaction vocab");
        t.y(k) = 1.0;
      }
  }
  return t;
}

AffordanceVariant affordance_variant_from_string(const std::string& name) {
  if (name == "S" || name == "s") return AffordanceVariant::S;
  if (name == "M" || name == "m") return AffordanceVariant::M;
  if (name == "C" || name == "c") return AffordanceVariant::C;
  if (name == "clip_action" || name == "ClipAction") return AffordanceVariant::ClipAction;
  if (name == "kmeans" || name == "KMeans") return AffordanceVariant::KMeans;
  throw UsageError("unknown affordance variant: " + name +
                   " (expected S, M, C, clip_action or kmeans)");
}

std::string to_string(AffordanceVariant v) {
  switch (v) {
    case AffordanceVariant::S: return "S";
    case AffordanceVariant::M: return "M";
    case AffordanceVariant::C: return "C";
    case AffordanceVariant::ClipAction: return "clip_action";
    case AffordanceVariant::KMeans: return "kmeans";
  }
  return "?";
}

namespace {

std::vector<AffordanceSample> node_level_samples(
    const std::vector<TopoGraph>& graphs, const Dataset& ds) {
  std::vector<AffordanceSample> out;
  for (const TopoGraph& g : graphs) {
    std::vector<const ClipAnnotation*> anns = ds.clips_of(g.video_id);
    for (const ZoneNode& n : g.nodes) {
      AffordanceTargets t = node_affordance_labels(n, anns, ds.vocab);
      for (const Visit& v : n.visits)
        out.push_back({g.video_id, v.center(), t});
    }
  }
  return out;
}

std::vector<AffordanceSample> cluster_level_samples(const ConsolidatedGraph& cg,
                                                    const Dataset& ds) {
  std::vector<AffordanceSample> out;
  for (const Cluster& c : cg.clusters) {
    AffordanceTargets t = cluster_affordance_labels(c, ds);
    for (const ClusterVisit& cv : c.visits)
      out.push_back({cv.video_id, cv.visit.center(), t});
  }
  return out;
}

std::vector<const ClipAnnotation*> train_clips(
    const Dataset& ds, const std::vector<std::string>& train_video_ids) {
  std::vector<const ClipAnnotation*> clips;
  for (const auto& id : train_video_ids)
    for (const ClipAnnotation* a : ds.clips_of(id)) clips.push_back(a);
  return clips;
}

}  // namespace

std::vector<AffordanceSample> build_affordance_training_set(
    AffordanceVariant variant, const Dataset& ds,
    const std::vector<TopoGraph>& graphs,
    const std::vector<std::string>& train_video_ids,
    const AffordanceSetOptions& opts) {
  const int A = ds.vocab.num_interactions();
  switch (variant) {
    case AffordanceVariant::S:
      return node_level_samples(graphs, ds);

    case AffordanceVariant::M: {
      // Combined per-kitchen maps: link only graphs of the same kitchen.
      std::map<std::string, std::vector<TopoGraph>> by_kitchen;
      for (const TopoGraph& g : graphs)
        by_kitchen[ds.kitchen_of.at(g.video_id)].push_back(g);
      std::vector<AffordanceSample> out;
      for (const auto& [kitchen, kgraphs] : by_kitchen) {
        ConsolidatedGraph cg = link_nodes(kgraphs, ds, opts.link);
        auto samples = cluster_level_samples(cg, ds);
        out.insert(out.end(), samples.begin(), samples.end());
      }
      return out;
    }

    case AffordanceVariant::C: {
      ConsolidatedGraph cg = link_nodes(graphs, ds, opts.link);
      return cluster_level_samples(cg, ds);
    }

    case AffordanceVariant::ClipAction: {
      std::vector<AffordanceSample> out;
      for (const ClipAnnotation* a : train_clips(ds, train_video_ids)) {
        int k = ds.vocab.interaction_id(a->verb_id, a->noun_id);
        EGOTOPO_CHECK(k >= 0, "annotation outside interaction vocab");
        AffordanceTargets t;
        t.y = Vec::Zero(A);
        t.mask = Vec::Zero(A);
        t.y(k) = 1.0;
        t.mask(k) = 1.0;  // loss masked to the annotated class only
        t.source = AffordanceTargets::Source::clip_level;
        out.push_back({a->video_id, a->center_frame(), t});
      }
      return out;
    }

    case AffordanceVariant::KMeans: {
      auto clips = train_clips(ds, train_video_ids);
      if (clips.empty()) return {};
      int k = opts.kmeans_k;
      if (k <= 0) {
        // As many clusters as the consolidated graph has nodes.
        ConsolidatedGraph cg = link_nodes(graphs, ds, opts.link);
        k = static_cast<int>(cg.clusters.size());
      }
      k = std::max(1, std::min<int>(k, static_cast<int>(clips.size())));
      Mat points(clips.size(), ds.dim());
      for (std::size_t i = 0; i < clips.size(); ++i)
        points.row(static_cast<Eigen::Index>(i)) =
            ds.video(clips[i]->video_id).frame(clips[i]->center_frame()).transpose();
      std::vector<int> assign = kmeans_assign(points, k, opts.kmeans_iters, opts.seed);
      std::vector<Vec> cluster_y(k, Vec::Zero(A));
      for (std::size_t i = 0; i < clips.size(); ++i) {
        int cls = ds.vocab.interaction_id(clips[i]->verb_id, clips[i]->noun_id);
        cluster_y[assign[i]](cls) = 1.0;
      }
      std::vector<AffordanceSample> out;
      for (std::size_t i = 0; i < clips.size(); ++i) {
        AffordanceTargets t;
        t.y = cluster_y[assign[i]];
        t.mask = Vec::Ones(A);
        t.source = AffordanceTargets::Source::node_level;
        out.push_back({clips[i]->video_id, clips[i]->center_frame(), t});
      }
      return out;
    }
  }
  throw UsageError("unknown affordance variant");
}

AffordanceModel::AffordanceModel(int dim, int hidden, int num_classes)
    : mlp_(std::vector<int>{dim, hidden, hidden, num_classes}) {}

Mat AffordanceModel::predict(const Mat& features) const {
  return nn::sigmoid(mlp_.forward(features));
}

void AffordanceModel::save(const std::filesystem::path& path,
                           const std::string& extra_meta) const {
  nlohmann::json meta = nlohmann::json::parse(extra_meta);
  meta["kind"] = "affordance";
  meta["schema_version"] = kSchemaVersion;
  meta["widths"] = mlp_.widths();
  save_checkpoint({meta.dump(), mlp_.params()}, path);
}

AffordanceModel AffordanceModel::load(const std::filesystem::path& path) {
  Checkpoint ckpt = load_checkpoint(path);
  nlohmann::json meta = nlohmann::json::parse(ckpt.meta_json);
  if (meta.at("kind").get<std::string>() != "affordance")
    throw DataError("checkpoint is not an affordance model: " + path.string());
  AffordanceModel m;
  m.mlp_ = nn::Mlp(meta.at("widths").get<std::vector<int>>());
  if (m.mlp_.param_count() != ckpt.params.size())
    throw DataError("checkpoint parameter count mismatch: " + path.string());
  m.mlp_.params() = ckpt.params;
  return m;
}

AffordanceTrainResult train_affordance(const std::vector<AffordanceSample>& samples,
                                       const Dataset& ds,
                                       const AffordanceTrainConfig& cfg) {
  if (samples.empty()) throw UsageError("no affordance training samples");
  if (cfg.lr <= 0 || cfg.epochs <= 0 || cfg.batch_size <= 0 || cfg.hidden <= 0)
    throw UsageError("invalid affordance training config");
  const int A = static_cast<int>(samples.front().targets.y.size());
  const int dim = ds.dim();

  double mask_total = 0.0;
  for (const auto& s : samples) mask_total += s.targets.mask.sum();
  if (mask_total == 0.0)
    throw UsageError("every affordance sample is fully masked");

  Mat x(samples.size(), dim), y(samples.size(), A), mask(samples.size(), A);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) =
        ds.video(samples[i].video_id).frame(samples[i].frame).transpose();
    y.row(static_cast<Eigen::Index>(i)) = samples[i].targets.y.transpose();
    mask.row(static_cast<Eigen::Index>(i)) = samples[i].targets.mask.transpose();
  }

  Rng rng(cfg.seed);
  AffordanceTrainResult res;
  res.model = AffordanceModel(dim, cfg.hidden, A);
  nn::Mlp& mlp = res.model.mlp();
  mlp.init_params(rng);

  nn::AdamConfig acfg;
  acfg.lr = cfg.lr;
  acfg.weight_decay = cfg.weight_decay;
  nn::Adam opt(mlp.param_count(), acfg);

  std::vector<int> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  Vec grad(mlp.param_count());
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (epoch == cfg.anneal_epoch) opt.set_lr(cfg.lr_final);
    rng.shuffle(order);
    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t lo = 0; lo < order.size(); lo += cfg.batch_size) {
      std::size_t hi = std::min(lo + cfg.batch_size, order.size());
      Mat xb(hi - lo, dim), yb(hi - lo, A), mb(hi - lo, A);
      for (std::size_t i = lo; i < hi; ++i) {
        xb.row(static_cast<Eigen::Index>(i - lo)) = x.row(order[i]);
        yb.row(static_cast<Eigen::Index>(i - lo)) = y.row(order[i]);
        mb.row(static_cast<Eigen::Index>(i - lo)) = mask.row(order[i]);
      }
      nn::Mlp::Cache cache;
      Mat logits = mlp.forward(xb, cache);
      Mat dlogits;
      epoch_loss += nn::masked_bce_with_logits(logits, yb, mb, &dlogits);
      grad.setZero();
      mlp.backward(cache, dlogits, grad);
      opt.step(mlp.params(), grad);
      ++batches;
    }
    res.train_loss.push_back(epoch_loss / std::max(1, batches));
  }
  return res;
}

std::vector<int> interaction_train_counts(const Dataset& ds,
                                          const std::vector<std::string>& video_ids) {
  std::vector<int> counts(ds.vocab.num_interactions(), 0);
  for (const auto& id : video_ids)
    for (const ClipAnnotation* a : ds.clips_of(id)) {
      int k = ds.vocab.interaction_id(a->verb_id, a->noun_id);
      if (k >= 0) ++counts[k];
    }
  return counts;
}

std::vector<int> verb_train_counts(const Dataset& ds,
                                   const std::vector<std::string>& video_ids) {
  std::vector<int> counts(ds.vocab.num_verbs(), 0);
  for (const auto& id : video_ids)
    for (const ClipAnnotation* a : ds.clips_of(id)) ++counts[a->verb_id];
  return counts;
}

std::vector<int> kmeans_assign(const Mat& points, int k, int iters,
                               std::uint64_t seed) {
  const int n = static_cast<int>(points.rows());
  EGOTOPO_CHECK(k >= 1 && k <= n, "kmeans k out of range");
  Rng rng(seed);

  // k-means++ seeding.
  Mat centers(k, points.cols());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  int first = static_cast<int>(rng.uniform_index(n));
  centers.row(0) = points.row(first);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      double d = (points.row(i) - centers.row(c - 1)).squaredNorm();
      d2[i] = std::min(d2[i], d);
      total += d2[i];
    }
    double u = rng.uniform() * total;
    int pick = n - 1;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      acc += d2[i];
      if (u < acc) {
        pick = i;
        break;
      }
    }
    centers.row(c) = points.row(pick);
  }

  std::vector<int> assign(n, 0);
  for (int it = 0; it < iters; ++it) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (int c = 0; c < k; ++c) {
        double d = (points.row(i) - centers.row(c)).squaredNorm();
        if (d < best) {
          best = d;
          arg = c;
        }
      }
      if (arg != assign[i]) {
        assign[i] = arg;
        changed = true;
      }
    }
    Mat sums = Mat::Zero(k, points.cols());
    std::vector<int> counts(k, 0);
    for (int i = 0; i < n; ++i) {
      sums.row(assign[i]) += points.row(i);
      ++counts[assign[i]];
    }
    for (int c = 0; c < k; ++c)
      if (counts[c] > 0) centers.row(c) = sums.row(c) / counts[c];
    if (!changed) break;
  }
  return assign;
}

}  // namespace egotopo
