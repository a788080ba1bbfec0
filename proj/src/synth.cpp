#include "egotopo/synth.hpp"

#include <algorithm>
#include <cmath>

#include "egotopo/common.hpp"
#include "egotopo/dataset.hpp"

namespace egotopo {

void validate(const SynthConfig& cfg) {
  if (cfg.n_zones < 1 || cfg.dim < 1 || cfg.n_videos < 0 || cfg.frames_per_video < 1)
    throw UsageError("synth sizes must be positive");
  if (!(cfg.separation > 0.0) || !(cfg.noise_scale >= 0.0) || !(cfg.dwell_mean >= 1.0))
    throw UsageError("synth scales must be positive");
  if (!(cfg.fps > 0.0)) throw UsageError("synth fps must be positive");
  if (!cfg.transition.empty()) {
    if (static_cast<int>(cfg.transition.size()) != cfg.n_zones)
      throw UsageError("transition matrix size does not match n_zones");
    for (const auto& row : cfg.transition) {
      if (static_cast<int>(row.size()) != cfg.n_zones)
        throw UsageError("transition matrix is not square");
      double sum = 0.0;
      for (double p : row) {
        if (p < 0.0) throw UsageError("negative transition probability");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw UsageError("transition rows must sum to 1");
    }
  }
}

std::vector<std::vector<double>> uniform_transition(int n_zones) {
  std::vector<std::vector<double>> t(n_zones, std::vector<double>(n_zones, 0.0));
  if (n_zones == 1) {
    t[0][0] = 1.0;
    return t;
  }
  for (int i = 0; i < n_zones; ++i)
    for (int j = 0; j < n_zones; ++j)
      if (i != j) t[i][j] = 1.0 / (n_zones - 1);
  return t;
}

std::vector<std::vector<double>> cycle_transition(const std::vector<int>& order) {
  int n = static_cast<int>(order.size());
  std::vector<std::vector<double>> t(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) t[order[i]][order[(i + 1) % n]] = 1.0;
  return t;
}

std::vector<ZoneSpec> generate_environment(const SynthConfig& cfg,
                                           const std::vector<ZoneTypeSpec>& types,
                                           Rng& rng) {
  validate(cfg);
  EGOTOPO_CHECK(!types.empty(), "need at least one zone type");
  const double min_dist = cfg.separation * cfg.noise_scale;
  // Centroid magnitude sized so typical pairwise distances land around
  // 1.5x the required minimum; rejection handles the tail.
  const double scale = std::max(1.0, 1.5 * min_dist / std::sqrt(2.0 * cfg.dim));
  std::vector<ZoneSpec> zones;
  for (int z = 0; z < cfg.n_zones; ++z) {
    Eigen::VectorXd c(cfg.dim);
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      for (int d = 0; d < cfg.dim; ++d) c(d) = scale * rng.gaussian();
      placed = true;
      for (const auto& other : zones)
        if ((c - other.centroid).norm() < min_dist) {
          placed = false;
          break;
        }
    }
    if (!placed)
      throw DataError("could not place zone centroids at the requested separation");
    ZoneSpec spec;
    spec.zone_id = z;
    spec.type_id = z % static_cast<int>(types.size());
    const ZoneTypeSpec& type = types[spec.type_id];
    spec.centroid = c;
    spec.noise_scale = cfg.noise_scale;
    spec.affordance_set = type.affordance_set;
    spec.action_dist = type.action_dist;
    spec.object_dist = type.object_dist;
    spec.interaction_dist = type.interaction_dist;
    zones.push_back(std::move(spec));
  }
  return zones;
}

namespace {

int sample_categorical(const Eigen::VectorXd& probs, Rng& rng) {
  double u = rng.uniform();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    acc += probs(i);
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

int sample_row(const std::vector<double>& row, Rng& rng) {
  double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    acc += row[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(row.size()) - 1;
}

int geometric_dwell(double mean, Rng& rng) {
  if (mean <= 1.0) return 1;
  double p = 1.0 / mean;
  double u = rng.uniform();
  int len = 1 + static_cast<int>(std::floor(std::log1p(-u) / std::log1p(-p)));
  return std::max(1, len);
}

}  // namespace

SynthVideo generate_video(const std::vector<ZoneSpec>& zones, const SynthConfig& cfg,
                          const std::string& video_id,
                          const InteractionVocab& vocab, Rng& rng) {
  EGOTOPO_CHECK(!zones.empty(), "generate_video needs zones");
  const int T = cfg.frames_per_video;
  const int dim = cfg.dim;
  const auto& transition =
      cfg.transition.empty() ? uniform_transition(static_cast<int>(zones.size()))
                             : cfg.transition;

  SynthVideo out;
  out.embeddings.video_id = video_id;
  out.embeddings.fps = cfg.fps;
  out.embeddings.dim = dim;
  out.embeddings.rows.resize(T, dim);
  out.frame_zone.resize(T);

  // Small bank of foreground-object directions makes the perturbation
  // low-rank across the video.
  std::vector<Eigen::VectorXd> object_bank;
  for (int i = 0; i < 8; ++i) {
    Eigen::VectorXd v(dim);
    for (int d = 0; d < dim; ++d) v(d) = rng.gaussian();
    v.normalize();
    object_bank.push_back(std::move(v));
  }

  int zone = static_cast<int>(rng.uniform_index(zones.size()));
  int t = 0;
  while (t < T) {
    int dwell = std::min(geometric_dwell(cfg.dwell_mean, rng), T - t);
    const ZoneSpec& spec = zones[zone];
    for (int f = t; f < t + dwell; ++f) {
      out.frame_zone[f] = zone;
      Eigen::VectorXd e = spec.centroid;
      for (int d = 0; d < dim; ++d) e(d) += spec.noise_scale * rng.gaussian();
      if (cfg.active_object_noise > 0.0 && rng.uniform() < cfg.perturb_fraction) {
        const Eigen::VectorXd& obj = object_bank[rng.uniform_index(object_bank.size())];
        e += cfg.active_object_noise * obj;
      }
      out.embeddings.rows.row(f) = e.cast<float>();
    }

    // Interaction clips inside the dwell.
    int n_clips = static_cast<int>(std::floor(cfg.clips_per_dwell));
    double frac = cfg.clips_per_dwell - n_clips;
    if (frac > 0.0 && rng.uniform() < frac) ++n_clips;
    for (int c = 0; c < n_clips && spec.affordance_set.size() > 0; ++c) {
      int pick = sample_categorical(spec.interaction_dist, rng);
      int interaction = spec.affordance_set[pick];
      auto [verb, noun] = vocab.interactions[interaction];
      int len = std::max(1, dwell / 3);
      int start = t + (dwell > len ? static_cast<int>(rng.uniform_index(dwell - len + 1)) : 0);
      int stop = std::min(start + len - 1, t + dwell - 1);
      out.annotations.push_back({video_id, start, stop, verb, noun});
    }

    t += dwell;
    zone = sample_row(transition[zone], rng);
  }
  std::sort(out.annotations.begin(), out.annotations.end(),
            [](const ClipAnnotation& a, const ClipAnnotation& b) {
              if (a.start_frame != b.start_frame) return a.start_frame < b.start_frame;
              return a.stop_frame < b.stop_frame;
            });
  return out;
}

namespace {

std::string video_name(const std::string& kitchen, int index) {
  return kitchen + "_v" + std::to_string(index);
}

void add_video(SynthBenchmark& bench, const std::string& kitchen, SynthVideo&& video) {
  const std::string id = video.embeddings.video_id;
  bench.dataset.kitchen_of[id] = kitchen;
  bench.frame_zone[id] = std::move(video.frame_zone);
  bench.dataset.annotations.insert(bench.dataset.annotations.end(),
                                   video.annotations.begin(), video.annotations.end());
  bench.dataset.videos.emplace(id, std::move(video.embeddings));
}

}  // namespace

SynthBenchmark make_zone_benchmark(const ZoneBenchmarkConfig& cfg) {
  validate(cfg.base);
  const int Z = cfg.base.n_zones;
  SynthBenchmark bench;
  InteractionVocab vocab;
  for (int z = 0; z < Z; ++z) {
    vocab.verbs.push_back("verb_" + std::to_string(z));
    vocab.nouns.push_back("noun_" + std::to_string(z));
    vocab.interactions.emplace_back(z, z);
  }
  bench.dataset.vocab = vocab;

  std::vector<ZoneTypeSpec> types;
  for (int z = 0; z < Z; ++z) {
    ZoneTypeSpec t;
    t.action_dist = Eigen::VectorXd::Zero(Z);
    t.action_dist(z) = 1.0;
    t.object_dist = Eigen::VectorXd::Zero(Z);
    t.object_dist(z) = 1.0;
    t.affordance_set = {z};
    t.interaction_dist = Eigen::VectorXd::Ones(1);
    types.push_back(std::move(t));
  }

  Rng rng(cfg.base.seed);
  const std::string kitchen = "k0";
  std::vector<ZoneSpec> zones = generate_environment(cfg.base, types, rng);
  bench.zone_types[kitchen] = {};
  bench.zone_affordances[kitchen] = {};
  for (const auto& z : zones) {
    bench.zone_types[kitchen].push_back(z.type_id);
    bench.zone_affordances[kitchen].push_back(z.affordance_set);
  }

  DatasetSplits splits;
  const int total = cfg.base.n_videos + cfg.eval_videos;
  for (int v = 0; v < total; ++v) {
    std::string id = video_name(kitchen, v);
    Rng vrng = rng.derive(1000 + v);
    SynthVideo video = generate_video(zones, cfg.base, id, vocab, vrng);
    (v < cfg.base.n_videos ? splits.train : splits.eval).push_back(id);
    if (v >= cfg.base.n_videos) {
      // Eval frames carry the full zone affordance set as labels.
      for (int f = 0; f < cfg.base.frames_per_video; f += 50)
        bench.affordance_eval.push_back(
            {id, f, zones[video.frame_zone[f]].affordance_set});
    }
    add_video(bench, kitchen, std::move(video));
  }
  bench.dataset.splits = splits;
  validate_dataset(bench.dataset);
  return bench;
}

SynthBenchmark make_affordance_benchmark(const AffordanceBenchmarkConfig& cfg) {
  if (cfg.n_kitchens < 2 || cfg.n_types < 2)
    throw UsageError("affordance benchmark needs >= 2 kitchens and types");
  SynthBenchmark bench;

  // Vocab: each type owns verbs {2t, 2t+1} and nouns {3t .. 3t+2}; its six
  // interactions are all verb x noun pairs of the pool. The first two pairs
  // are the core ones every kitchen demonstrates.
  InteractionVocab vocab;
  for (int t = 0; t < 2 * cfg.n_types; ++t)
    vocab.verbs.push_back("verb_" + std::to_string(t));
  for (int t = 0; t < 3 * cfg.n_types; ++t)
    vocab.nouns.push_back("noun_" + std::to_string(t));
  std::vector<std::vector<int>> type_interactions(cfg.n_types);
  std::vector<std::vector<int>> type_core(cfg.n_types), type_rare(cfg.n_types);
  for (int t = 0; t < cfg.n_types; ++t) {
    int v0 = 2 * t, v1 = 2 * t + 1;
    int n0 = 3 * t, n1 = 3 * t + 1, n2 = 3 * t + 2;
    std::vector<std::pair<int, int>> pairs = {{v0, n0}, {v1, n1}, {v0, n1},
                                              {v0, n2}, {v1, n0}, {v1, n2}};
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      int id = static_cast<int>(vocab.interactions.size());
      vocab.interactions.push_back(pairs[i]);
      type_interactions[t].push_back(id);
      (i < 2 ? type_core[t] : type_rare[t]).push_back(id);
    }
  }
  bench.dataset.vocab = vocab;

  Rng rng(cfg.seed);
  DatasetSplits splits;
  for (int k = 0; k < cfg.n_kitchens; ++k) {
    std::string kitchen = "k" + std::to_string(k);

    // Per-kitchen type profiles: cores everywhere, each rare interaction
    // demonstrated by exactly one kitchen.
    std::vector<ZoneTypeSpec> types;
    bench.zone_types[kitchen] = {};
    bench.zone_affordances[kitchen] = {};
    for (int t = 0; t < cfg.n_types; ++t) {
      ZoneTypeSpec type;
      std::vector<int> demo = type_core[t];
      for (std::size_t r = 0; r < type_rare[t].size(); ++r)
        if (static_cast<int>((r + t) % cfg.n_kitchens) == k)
          demo.push_back(type_rare[t][r]);
      type.affordance_set = demo;
      type.interaction_dist = Eigen::VectorXd::Zero(demo.size());
      double rare_mass = 1.0 - cfg.core_share;
      int n_rare = static_cast<int>(demo.size()) - 2;
      for (std::size_t i = 0; i < demo.size(); ++i)
        type.interaction_dist(static_cast<Eigen::Index>(i)) =
            i < 2 ? cfg.core_share / 2.0
                  : (n_rare > 0 ? rare_mass / n_rare : 0.0);
      type.interaction_dist /= type.interaction_dist.sum();
      type.action_dist = Eigen::VectorXd::Zero(vocab.num_verbs());
      type.object_dist = Eigen::VectorXd::Zero(vocab.num_nouns());
      for (std::size_t i = 0; i < demo.size(); ++i) {
        auto [verb, noun] = vocab.interactions[demo[i]];
        type.action_dist(verb) += type.interaction_dist(static_cast<Eigen::Index>(i));
        type.object_dist(noun) += type.interaction_dist(static_cast<Eigen::Index>(i));
      }
      types.push_back(std::move(type));
    }

    SynthConfig env_cfg;
    env_cfg.n_zones = cfg.n_types;
    env_cfg.dim = cfg.dim;
    env_cfg.separation = cfg.separation;
    env_cfg.noise_scale = cfg.noise_scale;
    env_cfg.dwell_mean = cfg.dwell_mean;
    env_cfg.active_object_noise = cfg.active_object_noise;
    env_cfg.frames_per_video = cfg.frames_per_video;
    env_cfg.fps = cfg.fps;
    env_cfg.clips_per_dwell = cfg.clips_per_dwell;
    env_cfg.n_videos = cfg.train_videos_per_kitchen;
    env_cfg.seed = cfg.seed;

    Rng krng = rng.derive(7000 + k);
    std::vector<ZoneSpec> zones = generate_environment(env_cfg, types, krng);
    for (const auto& z : zones) {
      bench.zone_types[kitchen].push_back(z.type_id);
      // Ground-truth affordances are the full type set, not just the
      // kitchen-demonstrated subset.
      bench.zone_affordances[kitchen].push_back(type_interactions[z.type_id]);
    }

    int total = cfg.train_videos_per_kitchen + cfg.eval_videos_per_kitchen;
    for (int v = 0; v < total; ++v) {
      std::string id = video_name(kitchen, v);
      Rng vrng = krng.derive(100 + v);
      SynthVideo video = generate_video(zones, env_cfg, id, vocab, vrng);
      bool is_train = v < cfg.train_videos_per_kitchen;
      (is_train ? splits.train : splits.eval).push_back(id);
      if (!is_train) {
        int step = std::max(1, cfg.frames_per_video / cfg.eval_frames_per_video);
        for (int f = 0; f < cfg.frames_per_video; f += step)
          bench.affordance_eval.push_back(
              {id, f, type_interactions[zones[video.frame_zone[f]].type_id]});
      }
      add_video(bench, kitchen, std::move(video));
    }
  }
  bench.dataset.splits = splits;
  validate_dataset(bench.dataset);
  return bench;
}

SynthBenchmark make_anticipation_benchmark(const AnticipationBenchmarkConfig& cfg) {
  if (cfg.n_zones < 4) throw UsageError("anticipation benchmark needs >= 4 zones");
  SynthBenchmark bench;

  // Verbs 0..3 are the base repertoire; verbs 4,5 belong to recipe class 0
  // and verbs 6,7 to class 1, appearing only late in a video. Every verb is
  // paired with noun verb%4.
  InteractionVocab vocab;
  for (int v = 0; v < 8; ++v) vocab.verbs.push_back("verb_" + std::to_string(v));
  for (int n = 0; n < 4; ++n) vocab.nouns.push_back("noun_" + std::to_string(n));
  for (int v = 0; v < 8; ++v) vocab.interactions.emplace_back(v, v % 4);
  bench.dataset.vocab = vocab;

  std::vector<ZoneTypeSpec> types;
  for (int z = 0; z < cfg.n_zones; ++z) {
    ZoneTypeSpec t;
    t.action_dist = Eigen::VectorXd::Zero(8);
    t.object_dist = Eigen::VectorXd::Zero(4);
    for (int v = 0; v < 4; ++v) {
      t.affordance_set.push_back(v);
      t.action_dist(v) = 0.25;
      t.object_dist(v) = 0.25;
    }
    t.interaction_dist = Eigen::VectorXd::Constant(4, 0.25);
    types.push_back(std::move(t));
  }

  SynthConfig env_cfg;
  env_cfg.n_zones = cfg.n_zones;
  env_cfg.dim = cfg.dim;
  env_cfg.separation = cfg.separation;
  env_cfg.noise_scale = cfg.noise_scale;
  env_cfg.dwell_mean = cfg.dwell_mean;
  env_cfg.frames_per_video = cfg.frames_per_video;
  env_cfg.fps = cfg.fps;
  env_cfg.clips_per_dwell = cfg.clips_per_dwell;
  env_cfg.seed = cfg.seed;

  Rng rng(cfg.seed);
  const std::string kitchen = "k0";
  std::vector<ZoneSpec> zones = generate_environment(env_cfg, types, rng);
  bench.zone_types[kitchen] = {};
  bench.zone_affordances[kitchen] = {};
  for (const auto& z : zones) {
    bench.zone_types[kitchen].push_back(z.type_id);
    bench.zone_affordances[kitchen].push_back(z.affordance_set);
  }

  // Same zone set and visit rates for both classes; only the cyclic order of
  // traversal differs.
  std::vector<int> order0, order1;
  for (int z = 0; z < cfg.n_zones; ++z) order0.push_back(z);
  for (int z = 0; z < cfg.n_zones; z += 2) order1.push_back(z);
  for (int z = 1; z < cfg.n_zones; z += 2) order1.push_back(z);
  std::vector<std::vector<std::vector<double>>> transitions = {
      cycle_transition(order0), cycle_transition(order1)};

  DatasetSplits splits;
  int total = cfg.train_videos + cfg.eval_videos;
  for (int v = 0; v < total; ++v) {
    std::string id = video_name(kitchen, v);
    int cls = v % 2;
    SynthConfig vcfg = env_cfg;
    vcfg.transition = transitions[cls];
    Rng vrng = rng.derive(100 + v);
    SynthVideo video = generate_video(zones, vcfg, id, vocab, vrng);
    // Rewrite late clips with class verbs.
    int future_start = static_cast<int>(cfg.future_start * cfg.frames_per_video);
    for (auto& a : video.annotations) {
      if (a.center_frame() < future_start) continue;
      if (vrng.uniform() < cfg.future_verb_prob) {
        a.verb_id = 4 + 2 * cls + static_cast<int>(vrng.uniform_index(2));
        a.noun_id = a.verb_id % 4;
      }
    }
    bench.video_class[id] = cls;
    (v < cfg.train_videos ? splits.train : splits.eval).push_back(id);
    add_video(bench, kitchen, std::move(video));
  }
  bench.dataset.splits = splits;
  validate_dataset(bench.dataset);
  return bench;
}

}  // namespace egotopo
