#include "egotopo/config.hpp"

#include "egotopo/common.hpp"
#include "json.hpp"

namespace egotopo {

using nlohmann::json;

namespace {

json default_tree() {
  return json{
      {"seed", 0},
      {"threads", 0},
      {"synth",
       {{"benchmark", "zones"},
        {"n_zones", 6},
        {"dim", 64},
        {"separation", 10.0},
        {"noise_scale", 0.1},
        {"dwell_mean", 40.0},
        {"active_object_noise", 0.0},
        {"perturb_fraction", 0.2},
        {"n_videos", 3},
        {"eval_videos", 1},
        {"frames_per_video", 1000},
        {"fps", 6.0},
        {"clips_per_dwell", 1.0},
        {"n_kitchens", 3},
        {"n_types", 4},
        {"train_videos_per_kitchen", 2},
        {"eval_videos_per_kitchen", 1},
        {"core_share", 0.88},
        {"eval_frames_per_video", 40},
        {"train_videos", 40},
        {"future_start", 0.55},
        {"future_verb_prob", 0.7}}},
      {"pairs",
       {{"temporal_window", 15},
        {"min_inliers", 10},
        {"ransac_iters", 1000},
        {"inlier_px", 3.0},
        {"dissim_min_gap", 200},
        {"dissim_max_feature_sim", 0.5},
        {"pairs_per_video", 200}}},
      {"sim",
       {{"lr", 1e-4},
        {"epochs", 20},
        {"batch_size", 256},
        {"val_fraction", 0.1},
        {"hidden", 256},
        {"layers", 5},
        {"weight_decay", 0.0},
        {"scorer", "mlp"},
        {"cosine_center", 0.5},
        {"cosine_temperature", 0.1}}},
      {"builder",
       {{"sigma", 0.7},
        {"margin", 0.3},
        {"score_window", 9},
        {"frames_per_visit", 20},
        {"visit_rep", "samples"},
        {"videos", "train"}}},
      {"link",
       {{"threshold_fraction", 0.4},
        {"linkage", "average"},
        {"epsilon", 1e-4},
        {"scope", "all"}}},
      {"affordance",
       {{"variant", "C"},
        {"lr", 1e-4},
        {"lr_final", 1e-5},
        {"anneal_epoch", 15},
        {"epochs", 20},
        {"batch_size", 256},
        {"weight_decay", 1e-6},
        {"hidden", 512},
        {"kmeans_k", 0},
        {"kmeans_iters", 50},
        {"freq_min", 100},
        {"rare_max", 10}}},
      {"anticipation",
       {{"variant", "gcn"},
        {"hidden", 64},
        {"lr", 1e-3},
        {"lr_decay_factor", 0.1},
        {"decay_epoch", 80},
        {"epochs", 100},
        {"batch_size", 256},
        {"weight_decay", 1e-5},
        {"horizons", {0.25, 0.5, 0.75}},
        {"clip_overlap_min", 0.5},
        {"target", "verbs"}}}};
}

void merge_into(json& base, const json& overrides, const std::string& prefix) {
  if (!overrides.is_object())
    throw UsageError("config overrides must be a JSON object" +
                     (prefix.empty() ? "" : " at " + prefix));
  for (const auto& [key, value] : overrides.items()) {
    std::string path = prefix.empty() ? key : prefix + "." + key;
    auto it = base.find(key);
    if (it == base.end()) throw UsageError("unknown config key: " + path);
    if (it->is_object()) {
      merge_into(*it, value, path);
      continue;
    }
    bool both_numeric = it->is_number() && value.is_number();
    if (!both_numeric && it->type() != value.type())
      throw UsageError("config key " + path + " has the wrong type");
    *it = value;
  }
}

}  // namespace

std::string default_config_json() { return default_tree().dump(2); }

std::string merge_config_json(const std::string& base, const std::string& overrides) {
  json b, o;
  try {
    b = json::parse(base);
  } catch (const json::exception& e) {
    throw UsageError(std::string("invalid base config JSON: ") + e.what());
  }
  try {
    o = overrides.empty() ? json::object() : json::parse(overrides);
  } catch (const json::exception& e) {
    throw UsageError(std::string("invalid config overrides JSON: ") + e.what());
  }
  merge_into(b, o, "");
  return b.dump(2);
}

std::string effective_config_json(const std::string& overrides) {
  return merge_config_json(default_config_json(), overrides);
}

std::vector<ConfigKeyDoc> config_key_docs() {
  return {
      {"seed", "global random seed; every stage derives its streams from it"},
      {"threads", "worker cap for per-video parallel stages (0 = hardware)"},
      {"synth.benchmark", "generator preset: zones, affordance or anticipation"},
      {"synth.n_zones", "zones per environment (zones/anticipation presets)"},
      {"synth.dim", "embedding dimension"},
      {"synth.separation", "min centroid distance as a multiple of noise_scale"},
      {"synth.noise_scale", "within-zone Gaussian noise scale"},
      {"synth.dwell_mean", "mean geometric dwell length in frames"},
      {"synth.active_object_noise", "scale of the sparse foreground offset"},
      {"synth.perturb_fraction", "fraction of frames receiving the offset"},
      {"synth.n_videos", "training videos (zones preset)"},
      {"synth.eval_videos", "held-out videos (zones/anticipation presets)"},
      {"synth.frames_per_video", "frames per generated video"},
      {"synth.fps", "nominal frame rate written to headers"},
      {"synth.clips_per_dwell", "expected interaction clips per dwell"},
      {"synth.n_kitchens", "environments (affordance preset)"},
      {"synth.n_types", "functional zone types shared across kitchens"},
      {"synth.train_videos_per_kitchen", "training videos per kitchen"},
      {"synth.eval_videos_per_kitchen", "held-out videos per kitchen"},
      {"synth.core_share", "clip mass on the two core interactions of a type"},
      {"synth.eval_frames_per_video", "labeled eval frames sampled per video"},
      {"synth.train_videos", "training videos (anticipation preset)"},
      {"synth.future_start", "video fraction after which recipe verbs appear"},
      {"synth.future_verb_prob", "probability a late clip uses a recipe verb"},
      {"pairs.temporal_window", "frames; closer pairs are similar (default 15)"},
      {"pairs.min_inliers", "homography inlier count for similarity (default 10)"},
      {"pairs.ransac_iters", "RANSAC hypotheses per correspondence set"},
      {"pairs.inlier_px", "reprojection tolerance in pixels"},
      {"pairs.dissim_min_gap", "minimum frame gap for dissimilar candidates"},
      {"pairs.dissim_max_feature_sim", "cosine ceiling for dissimilar pairs"},
      {"pairs.pairs_per_video", "sampled pairs per class per video"},
      {"sim.lr", "similarity head learning rate"},
      {"sim.epochs", "similarity training epochs"},
      {"sim.batch_size", "similarity minibatch size"},
      {"sim.val_fraction", "held-out fraction for the training log"},
      {"sim.hidden", "similarity MLP hidden width"},
      {"sim.layers", "similarity MLP weight layers (default 5)"},
      {"sim.weight_decay", "similarity L2 coupled decay"},
      {"sim.scorer", "mlp (trained checkpoint) or cosine (closed form)"},
      {"sim.cosine_center", "cosine scorer calibration midpoint"},
      {"sim.cosine_temperature", "cosine scorer calibration temperature"},
      {"builder.sigma", "merge threshold (default 0.7)"},
      {"builder.margin", "create below sigma - margin (default 0.3)"},
      {"builder.score_window", "frames averaged around the query (default 9)"},
      {"builder.frames_per_visit", "sample frames per visit (default 20)"},
      {"builder.visit_rep", "visit representative: samples or center"},
      {"builder.videos", "which split to build graphs for: train, eval or all"},
      {"link.threshold_fraction",
       "stop merging below this fraction of mean pairwise similarity (default 0.4)"},
      {"link.linkage", "average, single or complete"},
      {"link.epsilon", "additive smoothing for node distributions"},
      {"link.scope", "all (consolidated) or kitchen (combined per kitchen)"},
      {"affordance.variant", "training set: S, M, C, clip_action or kmeans"},
      {"affordance.lr", "learning rate (default 1e-4)"},
      {"affordance.lr_final", "learning rate after anneal_epoch (default 1e-5)"},
      {"affordance.anneal_epoch", "epoch at which the rate anneals (default 15)"},
      {"affordance.epochs", "training epochs (default 20)"},
      {"affordance.batch_size", "minibatch size (default 256)"},
      {"affordance.weight_decay", "L2 coupled decay (default 1e-6)"},
      {"affordance.hidden", "classifier hidden width (default 512)"},
      {"affordance.kmeans_k", "kmeans cluster count (0 = consolidated node count)"},
      {"affordance.kmeans_iters", "Lloyd iterations"},
      {"affordance.freq_min", "frequent classes have more training instances"},
      {"affordance.rare_max", "rare classes have fewer training instances"},
      {"anticipation.variant", "gcn, no_gcn, mean_pool or train_dist"},
      {"anticipation.hidden", "node feature width"},
      {"anticipation.lr", "learning rate (default 1e-3)"},
      {"anticipation.lr_decay_factor", "rate multiplier at decay_epoch"},
      {"anticipation.decay_epoch", "epoch of the single rate decay (default 80)"},
      {"anticipation.epochs", "training epochs (default 100)"},
      {"anticipation.batch_size", "minibatch size (default 256)"},
      {"anticipation.weight_decay", "L2 coupled decay (default 1e-5)"},
      {"anticipation.horizons", "observed-fraction sweep (default 25/50/75%)"},
      {"anticipation.clip_overlap_min", "clip-to-node assignment threshold"},
      {"anticipation.target", "verbs or interactions"},
  };
}

}  // namespace egotopo
