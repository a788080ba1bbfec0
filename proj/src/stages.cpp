#include "egotopo/stages.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <thread>

#include "egotopo/affordance.hpp"
#include "egotopo/anticipation.hpp"
#include "egotopo/common.hpp"
#include "egotopo/config.hpp"
#include "egotopo/dataset.hpp"
#include "egotopo/linker.hpp"
#include "egotopo/pairgen.hpp"
#include "egotopo/serialize.hpp"
#include "egotopo/simnet.hpp"
#include "egotopo/synth.hpp"
#include "egotopo/topo.hpp"
#include "json.hpp"

namespace egotopo::stages {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct StageContext {
  json cfg;
  fs::path out_dir;
  std::vector<std::string> files;

  void add_file(const fs::path& rel) { files.push_back(rel.generic_string()); }

  void write_text(const fs::path& rel, const std::string& text) {
    fs::path p = out_dir / rel;
    fs::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw DataError("cannot write " + p.string());
    out << text;
    add_file(rel);
  }

  void finish() {
    write_text("effective_config.json", cfg.dump(2) + "\n");
    std::sort(files.begin(), files.end());
    json j = {{"schema_version", kSchemaVersion}, {"files", files}};
    std::ofstream out(out_dir / "files.json");
    out << j.dump(2) << "\n";
  }
};

StageContext make_context(const std::string& overrides, const fs::path& out_dir) {
  StageContext ctx;
  ctx.cfg = json::parse(effective_config_json(overrides));
  ctx.out_dir = out_dir;
  fs::create_directories(out_dir);
  return ctx;
}

int thread_count(const json& cfg) {
  int t = cfg.at("threads").get<int>();
  if (t <= 0) t = static_cast<int>(std::thread::hardware_concurrency());
  return std::max(1, t);
}

// Deterministic parallel map: results land in index order regardless of the
// thread count.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < n; i += threads) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

SynthConfig synth_config_from(const json& s, std::uint64_t seed) {
  SynthConfig c;
  c.n_zones = s.at("n_zones").get<int>();
  c.dim = s.at("dim").get<int>();
  c.separation = s.at("separation").get<double>();
  c.noise_scale = s.at("noise_scale").get<double>();
  c.dwell_mean = s.at("dwell_mean").get<double>();
  c.active_object_noise = s.at("active_object_noise").get<double>();
  c.perturb_fraction = s.at("perturb_fraction").get<double>();
  c.n_videos = s.at("n_videos").get<int>();
  c.frames_per_video = s.at("frames_per_video").get<int>();
  c.fps = s.at("fps").get<double>();
  c.clips_per_dwell = s.at("clips_per_dwell").get<double>();
  c.seed = seed;
  return c;
}

PairGenConfig pairs_config_from(const json& cfg) {
  const json& p = cfg.at("pairs");
  PairGenConfig c;
  c.temporal_window = p.at("temporal_window").get<int>();
  c.min_inliers = p.at("min_inliers").get<int>();
  c.ransac_iters = p.at("ransac_iters").get<int>();
  c.inlier_px = p.at("inlier_px").get<double>();
  c.dissim_min_gap = p.at("dissim_min_gap").get<int>();
  c.dissim_max_feature_sim = p.at("dissim_max_feature_sim").get<double>();
  c.pairs_per_video = p.at("pairs_per_video").get<int>();
  c.seed = cfg.at("seed").get<std::uint64_t>();
  return c;
}

SimTrainConfig sim_config_from(const json& cfg) {
  const json& s = cfg.at("sim");
  SimTrainConfig c;
  c.lr = s.at("lr").get<double>();
  c.epochs = s.at("epochs").get<int>();
  c.batch_size = s.at("batch_size").get<int>();
  c.val_fraction = s.at("val_fraction").get<double>();
  c.hidden = s.at("hidden").get<int>();
  c.layers = s.at("layers").get<int>();
  c.weight_decay = s.at("weight_decay").get<double>();
  c.seed = cfg.at("seed").get<std::uint64_t>();
  return c;
}

BuilderConfig builder_config_from(const json& cfg) {
  const json& b = cfg.at("builder");
  BuilderConfig c;
  c.sigma = b.at("sigma").get<double>();
  c.margin = b.at("margin").get<double>();
  c.score_window = b.at("score_window").get<int>();
  c.frames_per_visit = b.at("frames_per_visit").get<int>();
  c.seed = cfg.at("seed").get<std::uint64_t>();
  std::string rep = b.at("visit_rep").get<std::string>();
  if (rep == "samples") c.visit_rep = BuilderConfig::VisitRep::samples;
  else if (rep == "center") c.visit_rep = BuilderConfig::VisitRep::center;
  else throw UsageError("builder.visit_rep must be samples or center");
  return c;
}

LinkConfig link_config_from(const json& cfg) {
  const json& l = cfg.at("link");
  LinkConfig c;
  c.threshold_fraction = l.at("threshold_fraction").get<double>();
  c.epsilon = l.at("epsilon").get<double>();
  std::string linkage = l.at("linkage").get<std::string>();
  if (linkage == "average") c.linkage = LinkConfig::Linkage::average;
  else if (linkage == "single") c.linkage = LinkConfig::Linkage::single;
  else if (linkage == "complete") c.linkage = LinkConfig::Linkage::complete;
  else throw UsageError("link.linkage must be average, single or complete");
  return c;
}

AffordanceTrainConfig affordance_config_from(const json& cfg) {
  const json& a = cfg.at("affordance");
  AffordanceTrainConfig c;
  c.lr = a.at("lr").get<double>();
  c.lr_final = a.at("lr_final").get<double>();
  c.anneal_epoch = a.at("anneal_epoch").get<int>();
  c.epochs = a.at("epochs").get<int>();
  c.batch_size = a.at("batch_size").get<int>();
  c.weight_decay = a.at("weight_decay").get<double>();
  c.hidden = a.at("hidden").get<int>();
  c.seed = cfg.at("seed").get<std::uint64_t>();
  return c;
}

AnticipationConfig anticipation_config_from(const json& cfg) {
  const json& a = cfg.at("anticipation");
  AnticipationConfig c;
  c.variant = anticipation_variant_from_string(a.at("variant").get<std::string>());
  c.hidden = a.at("hidden").get<int>();
  c.lr = a.at("lr").get<double>();
  c.lr_decay_factor = a.at("lr_decay_factor").get<double>();
  c.decay_epoch = a.at("decay_epoch").get<int>();
  c.epochs = a.at("epochs").get<int>();
  c.batch_size = a.at("batch_size").get<int>();
  c.weight_decay = a.at("weight_decay").get<double>();
  c.horizons = a.at("horizons").get<std::vector<double>>();
  c.clip_overlap_min = a.at("clip_overlap_min").get<double>();
  std::string target = a.at("target").get<std::string>();
  if (target == "verbs") c.target = AnticipationTarget::verbs;
  else if (target == "interactions") c.target = AnticipationTarget::interactions;
  else throw UsageError("anticipation.target must be verbs or interactions");
  c.seed = cfg.at("seed").get<std::uint64_t>();
  return c;
}

std::unique_ptr<PairScorer> make_scorer(const json& cfg, const fs::path& checkpoint) {
  if (!checkpoint.empty())
    return std::make_unique<SimilarityModel>(SimilarityModel::load(checkpoint));
  const json& s = cfg.at("sim");
  return std::make_unique<CosineScorer>(s.at("cosine_center").get<double>(),
                                        s.at("cosine_temperature").get<double>());
}

std::vector<std::string> split_videos(const Dataset& ds, const std::string& which) {
  if (!ds.splits) return ds.video_ids();
  if (which == "train") return ds.splits->train;
  if (which == "eval") return ds.splits->eval;
  return ds.video_ids();
}

std::vector<TopoGraph> load_graphs_dir(const fs::path& dir,
                                       const std::vector<std::string>& video_ids) {
  std::vector<TopoGraph> graphs;
  for (const auto& id : video_ids) {
    fs::path p = dir / (id + ".json");
    if (!fs::exists(p)) p = dir / "graphs" / (id + ".json");
    if (!fs::exists(p))
      throw DataError("no graph for video " + id + " under " + dir.string());
    graphs.push_back(load_graph(p));
  }
  return graphs;
}

json losses_json(const std::vector<double>& losses) {
  json j = json::array();
  for (double l : losses) j.push_back(l);
  return j;
}

}  // namespace

void run_synth(const std::string& overrides, const fs::path& out_dir) {
  StageContext ctx = make_context(overrides, out_dir);
  const json& s = ctx.cfg.at("synth");
  std::uint64_t seed = ctx.cfg.at("seed").get<std::uint64_t>();
  std::string benchmark = s.at("benchmark").get<std::string>();

  SynthBenchmark bench;
  if (benchmark == "zones") {
    ZoneBenchmarkConfig c;
    c.base = synth_config_from(s, seed);
    c.eval_videos = s.at("eval_videos").get<int>();
    bench = make_zone_benchmark(c);
  } else if (benchmark == "affordance") {
    AffordanceBenchmarkConfig c;
    c.n_kitchens = s.at("n_kitchens").get<int>();
    c.n_types = s.at("n_types").get<int>();
    c.dim = s.at("dim").get<int>();
    c.separation = s.at("separation").get<double>();
    c.noise_scale = s.at("noise_scale").get<double>();
    c.active_object_noise = s.at("active_object_noise").get<double>();
    c.dwell_mean = s.at("dwell_mean").get<double>();
    c.frames_per_video = s.at("frames_per_video").get<int>();
    c.train_videos_per_kitchen = s.at("train_videos_per_kitchen").get<int>();
    c.eval_videos_per_kitchen = s.at("eval_videos_per_kitchen").get<int>();
    c.clips_per_dwell = s.at("clips_per_dwell").get<double>();
    c.core_share = s.at("core_share").get<double>();
    c.fps = s.at("fps").get<double>();
    c.eval_frames_per_video = s.at("eval_frames_per_video").get<int>();
    c.seed = seed;
    bench = make_affordance_benchmark(c);
  } else if (benchmark == "anticipation") {
    AnticipationBenchmarkConfig c;
    c.n_zones = s.at("n_zones").get<int>();
    c.dim = s.at("dim").get<int>();
    c.separation = s.at("separation").get<double>();
    c.noise_scale = s.at("noise_scale").get<double>();
    c.dwell_mean = s.at("dwell_mean").get<double>();
    c.frames_per_video = s.at("frames_per_video").get<int>();
    c.train_videos = s.at("train_videos").get<int>();
    c.eval_videos = s.at("eval_videos").get<int>();
    c.clips_per_dwell = s.at("clips_per_dwell").get<double>();
    c.future_start = s.at("future_start").get<double>();
    c.future_verb_prob = s.at("future_verb_prob").get<double>();
    c.fps = s.at("fps").get<double>();
    c.seed = seed;
    bench = make_anticipation_benchmark(c);
  } else {
    throw UsageError("synth.benchmark must be zones, affordance or anticipation");
  }

  save_dataset(bench.dataset, out_dir);
  ctx.add_file("manifest.json");
  ctx.add_file("annotations.jsonl");
  for (const auto& [id, _] : bench.dataset.videos) {
    ctx.add_file(fs::path("videos") / (id + ".bin"));
    ctx.add_file(fs::path("videos") / (id + ".bin.json"));
  }

  json gt;
  gt["schema_version"] = kSchemaVersion;
  gt["frame_zone"] = json::object();
  for (const auto& [id, zones] : bench.frame_zone) gt["frame_zone"][id] = zones;
  gt["zone_types"] = json::object();
  for (const auto& [kitchen, types] : bench.zone_types) gt["zone_types"][kitchen] = types;
  gt["zone_affordances"] = json::object();
  for (const auto& [kitchen, affs] : bench.zone_affordances) {
    json per_zone = json::object();
    for (std::size_t z = 0; z < affs.size(); ++z)
      per_zone[std::to_string(z)] = affs[z];
    gt["zone_affordances"][kitchen] = per_zone;
  }
  if (!bench.video_class.empty()) {
    gt["video_class"] = json::object();
    for (const auto& [id, cls] : bench.video_class) gt["video_class"][id] = cls;
  }
  ctx.write_text("ground_truth.json", gt.dump(2) + "\n");

  save_affordance_eval(bench.affordance_eval, out_dir / "affordance_eval.jsonl");
  ctx.add_file("affordance_eval.jsonl");
  ctx.finish();
}

void run_pairs(const std::string& overrides, const fs::path& manifest,
               const fs::path& correspondences, const fs::path& out_dir) {
  StageContext ctx = make_context(overrides, out_dir);
  Dataset ds = load_dataset(manifest);
  std::vector<Correspondences> corrs;
  if (!correspondences.empty()) corrs = load_correspondences_file(correspondences);
  std::vector<PairSample> pairs = sample_pairs(ds, corrs, pairs_config_from(ctx.cfg));
  save_pairs_file(pairs, out_dir / "pairs.jsonl");
  ctx.add_file("pairs.jsonl");
  ctx.finish();
}

void run_train_sim(const std::string& overrides, const fs::path& manifest,
                   const fs::path& pairs_file, const fs::path& out_dir) {
  StageContext ctx = make_context(overrides, out_dir);
  Dataset ds = load_dataset(manifest);
  std::vector<PairSample> pairs = load_pairs_file(pairs_file);
  SimTrainResult res = train_similarity(pairs, ds, sim_config_from(ctx.cfg));
  res.model.save(out_dir / "sim.ckpt",
                 json{{"seed", ctx.cfg.at("seed")}, {"train_config", ctx.cfg.at("sim")}}
                     .dump());
  ctx.add_file("sim.ckpt");
  json log = {{"schema_version", kSchemaVersion},
              {"train_loss", losses_json(res.train_loss)},
              {"val_loss", losses_json(res.val_loss)},
              {"val_accuracy", losses_json(res.val_accuracy)}};
  ctx.write_text("train_log.json", log.dump(2) + "\n");
  ctx.finish();
}

void run_build_graphs(const std::string& overrides, const fs::path& manifest,
                      const fs::path& sim_checkpoint, const fs::path& out_dir) {
  StageContext ctx = make_context(overrides, out_dir);
  Dataset ds = load_dataset(manifest);
  BuilderConfig bcfg = builder_config_from(ctx.cfg);
  std::unique_ptr<PairScorer> scorer = make_scorer(ctx.cfg, sim_checkpoint);
  std::vector<std::string> ids =
      split_videos(ds, ctx.cfg.at("builder").at("videos").get<std::string>());
  std::sort(ids.begin(), ids.end());

  fs::create_directories(out_dir / "graphs");
  std::vector<TopoGraph> graphs(ids.size());
  parallel_for(static_cast<int>(ids.size()), thread_count(ctx.cfg), [&](int i) {
    graphs[i] = build_graph(ds.video(ids[i]), *scorer, bcfg);
  });
  for (std::size_t i = 0; i < ids.size(); ++i) {
    fs::path rel = fs::path("graphs") / (ids[i] + ".json");
    save_graph(graphs[i], out_dir / rel);
    ctx.add_file(rel);
    fs::path dot_rel = fs::path("graphs") / (ids[i] + ".dot");
    ctx.write_text(dot_rel, graph_to_dot(graphs[i], false));
  }
  ctx.finish();
}

void run_link(const std::string& overrides, const fs::path& manifest,
              const fs::path& graphs_dir, const fs::path& out_dir) {
  StageContext ctx = make_context(overrides, out_dir);
  Dataset ds = load_dataset(manifest);
  LinkConfig lcfg = link_config_from(ctx.cfg);
  std::vector<std::string> ids =
      split_videos(ds, ctx.cfg.at("builder").at("videos").get<std::string>());
  std::sort(ids.begin(), ids.end());
  std::vector<TopoGraph> graphs = load_graphs_dir(graphs_dir, ids);

  std::string scope = ctx.cfg.at("link").at("scope").get<std::string>();
  if (scope == "all") {
    ConsolidatedGraph cg = link_nodes(graphs, ds, lcfg);
    ctx.write_text("consolidated.json", consolidated_to_json(cg) + "\n");
  } else if (scope == "kitchen") {
    std::map<std::string, std::vector<TopoGraph>> by_kitchen;
    for (const TopoGraph& g : graphs)
      by_kitchen[ds.kitchen_of.at(g.video_id)].push_back(g);
    for (const auto& [kitchen, kg] : by_kitchen) {
      ConsolidatedGraph cg = link_nodes(kg, ds, lcfg);
      ctx.write_text("combined_" + kitchen + ".json", consolidated_to_json(cg) + "\n");
    }
  } else {
    throw UsageError("link.scope must be all or kitchen");
  }
  ctx.finish();
}

void run_train_affordance(const std::string& overrides, const fs::path& manifest,
                          const fs::path& graphs_dir, const fs::path& out_dir) {
  StageContext ctx = make_context(overrides, out_dir);
  Dataset ds = load_dataset(manifest);
  const json& a = ctx.cfg.at("affordance");
  AffordanceVariant variant =
      affordance_variant_from_string(a.at("variant").get<std::string>());
  std::vector<std::string> train_ids = split_videos(ds, "train");
  std::sort(train_ids.begin(), train_ids.end());

  std::vector<TopoGraph> graphs;
  if (variant != AffordanceVariant::ClipAction)
    graphs = load_graphs_dir(graphs_dir, train_ids);

  AffordanceSetOptions opts;
  opts.link = link_config_from(ctx.cfg);
  opts.kmeans_k = a.at("kmeans_k").get<int>();
  opts.kmeans_iters = a.at("kmeans_iters").get<int>();
  opts.seed = ctx.cfg.at("seed").get<std::uint64_t>();
  std::vector<AffordanceSample> samples =
      build_affordance_training_set(variant, ds, graphs, train_ids, opts);

  AffordanceTrainResult res =
      train_affordance(samples, ds, affordance_config_from(ctx.cfg));
  res.model.save(out_dir / "affordance.ckpt",
                 json{{"variant", to_string(variant)},
                      {"seed", ctx.cfg.at("seed")},
                      {"train_config", a}}
                     .dump());
  ctx.add_file("affordance.ckpt");
  json log = {{"schema_version", kSchemaVersion},
              {"samples", samples.size()},
              {"train_loss", losses_json(res.train_loss)}};
  ctx.write_text("train_log.json", log.dump(2) + "\n");
  ctx.finish();
}

void run_eval_affordance(const std::string& overrides, const fs::path& manifest,
                         const fs::path& checkpoint, const fs::path& eval_file,
                         const fs::path& out_dir) {
  StageContext ctx = make_context(overrides, out_dir);
  Dataset ds = load_dataset(manifest);
  AffordanceModel model = AffordanceModel::load(checkpoint);
  std::vector<AffordanceEvalItem> items = load_affordance_eval(eval_file);
  if (items.empty()) throw DataError("empty affordance eval set");
  const int A = ds.vocab.num_interactions();
  if (model.num_classes() != A)
    throw DataError("checkpoint class count does not match the vocabulary");

  Eigen::MatrixXd features(items.size(), ds.dim());
  Eigen::MatrixXd gt = Eigen::MatrixXd::Zero(items.size(), A);
  for (std::size_t i = 0; i < items.size(); ++i) {
    features.row(static_cast<Eigen::Index>(i)) =
        ds.video(items[i].video_id).frame(items[i].frame).transpose();
    for (int label : items[i].labels) {
      if (label < 0 || label >= A)
        throw DataError("eval label outside the interaction vocabulary");
      gt(static_cast<Eigen::Index>(i), label) = 1.0;
    }
  }
  Eigen::MatrixXd scores = model.predict(features);

  const json& a = ctx.cfg.at("affordance");
  EvalSplit split =
      EvalSplit::from_counts(interaction_train_counts(ds, split_videos(ds, "train")),
                             a.at("freq_min").get<int>(), a.at("rare_max").get<int>());
  MapResult map = eval_map(scores, gt, split);

  json metrics = json::parse(map_result_to_json(map));
  metrics["schema_version"] = kSchemaVersion;
  metrics["num_samples"] = items.size();
  metrics["split_sizes"] = {{"all", split.all_classes.size()},
                            {"freq", split.freq_classes.size()},
                            {"rare", split.rare_classes.size()}};
  ctx.write_text("metrics.json", metrics.dump(2) + "\n");

  std::ostringstream preds;
  for (std::size_t i = 0; i < items.size(); ++i) {
    json j;
    j["sample_id"] = items[i].video_id + ":" + std::to_string(items[i].frame);
    std::vector<double> row(scores.cols());
    for (Eigen::Index c = 0; c < scores.cols(); ++c)
      row[c] = scores(static_cast<Eigen::Index>(i), c);
    j["scores"] = row;
    preds << j.dump() << "\n";
  }
  ctx.write_text("predictions.jsonl", preds.str());
  ctx.finish();
}

void run_train_anticipation(const std::string& overrides, const fs::path& manifest,
                            const fs::path& sim_checkpoint, const fs::path& out_dir) {
  StageContext ctx = make_context(overrides, out_dir);
  Dataset ds = load_dataset(manifest);
  AnticipationConfig acfg = anticipation_config_from(ctx.cfg);
  BuilderConfig bcfg = builder_config_from(ctx.cfg);
  std::vector<std::string> train_ids = split_videos(ds, "train");
  std::sort(train_ids.begin(), train_ids.end());
  if (train_ids.empty()) throw DataError("no training videos in the manifest");

  AnticipationModel model;
  std::vector<double> losses;
  if (acfg.variant == AnticipationVariant::train_dist) {
    model = AnticipationModel(acfg.variant, ds.dim(), acfg.hidden,
                              anticipation_num_classes(ds, acfg.target));
    model.fit_train_dist(train_ids, ds, acfg.target);
  } else {
    std::unique_ptr<PairScorer> scorer = make_scorer(ctx.cfg, sim_checkpoint);
    std::vector<std::pair<std::string, double>> jobs;
    for (const auto& id : train_ids)
      for (double k : acfg.horizons) jobs.emplace_back(id, k);
    std::vector<AnticipationSample> samples(jobs.size());
    std::vector<char> ok(jobs.size(), 1);
    parallel_for(static_cast<int>(jobs.size()), thread_count(ctx.cfg), [&](int i) {
      try {
        samples[i] =
            build_observed_sample(ds, jobs[i].first, jobs[i].second, *scorer, bcfg, acfg);
      } catch (const DataError&) {
        ok[i] = 0;  // videos with < 2 clips are skipped
      }
    });
    std::vector<AnticipationSample> usable;
    for (std::size_t i = 0; i < samples.size(); ++i)
      if (ok[i]) usable.push_back(std::move(samples[i]));
    AnticipationTrainResult res = train_anticipation(usable, ds, acfg);
    model = std::move(res.model);
    losses = std::move(res.train_loss);
  }
  model.save(out_dir / "anticipation.ckpt",
             json{{"seed", ctx.cfg.at("seed")}, {"train_config", ctx.cfg.at("anticipation")}}
                 .dump());
  ctx.add_file("anticipation.ckpt");
  json log = {{"schema_version", kSchemaVersion}, {"train_loss", losses_json(losses)}};
  ctx.write_text("train_log.json", log.dump(2) + "\n");
  ctx.finish();
}

void run_eval_anticipation(const std::string& overrides, const fs::path& manifest,
                           const fs::path& checkpoint, const fs::path& sim_checkpoint,
                           const fs::path& out_dir) {
  StageContext ctx = make_context(overrides, out_dir);
  Dataset ds = load_dataset(manifest);
  AnticipationConfig acfg = anticipation_config_from(ctx.cfg);
  BuilderConfig bcfg = builder_config_from(ctx.cfg);
  AnticipationModel model = AnticipationModel::load(checkpoint);
  std::unique_ptr<PairScorer> scorer = make_scorer(ctx.cfg, sim_checkpoint);

  std::vector<std::string> eval_ids = split_videos(ds, "eval");
  std::sort(eval_ids.begin(), eval_ids.end());
  std::vector<std::string> usable;
  for (const auto& id : eval_ids)
    if (ds.clips_of(id).size() >= 2) usable.push_back(id);
  if (usable.empty()) throw DataError("no evaluable videos (need >= 2 clips each)");

  const json& a = ctx.cfg.at("affordance");
  std::vector<int> counts = acfg.target == AnticipationTarget::verbs
                                ? verb_train_counts(ds, split_videos(ds, "train"))
                                : interaction_train_counts(ds, split_videos(ds, "train"));
  EvalSplit split = EvalSplit::from_counts(counts, a.at("freq_min").get<int>(),
                                           a.at("rare_max").get<int>());

  AnticipationEvalResult res =
      eval_anticipation(model, usable, ds, *scorer, bcfg, acfg, split);

  json metrics;
  metrics["schema_version"] = kSchemaVersion;
  metrics["mean"] = json::parse(map_result_to_json(res.mean));
  metrics["per_horizon"] = json::object();
  for (const auto& [key, r] : res.per_horizon)
    metrics["per_horizon"][key] = json::parse(map_result_to_json(r));
  ctx.write_text("metrics.json", metrics.dump(2) + "\n");

  std::ostringstream preds;
  for (const auto& id : usable)
    for (double k : acfg.horizons) {
      AnticipationSample sample = build_observed_sample(ds, id, k, *scorer, bcfg, acfg);
      Eigen::VectorXd scores = model.predict(sample);
      json j;
      j["sample_id"] =
          id + "@k" + std::to_string(static_cast<int>(std::lround(k * 100)));
      std::vector<double> row(scores.data(), scores.data() + scores.size());
      j["scores"] = row;
      preds << j.dump() << "\n";
    }
  ctx.write_text("predictions.jsonl", preds.str());
  ctx.finish();
}

void run_export(const fs::path& graph_json, const std::string& format, bool undirected,
                const fs::path& out_path) {
  TopoGraph g = load_graph(graph_json);
  std::string text;
  if (format == "dot") {
    text = graph_to_dot(g, undirected);
  } else if (format == "json") {
    text = graph_to_json(g) + "\n";
  } else {
    throw UsageError("export format must be dot or json");
  }
  if (!out_path.parent_path().empty()) fs::create_directories(out_path.parent_path());
  std::ofstream out(out_path);
  if (!out) throw DataError("cannot write " + out_path.string());
  out << text;
}

}  // namespace egotopo::stages
