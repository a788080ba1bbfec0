// Command-line driver for the egotopo pipeline. Links the shared C API only;
// argument parsing and config-override assembly happen here, everything else
// behind egotopo.h.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "egotopo.h"
#include "json.hpp"

namespace {

using nlohmann::json;

struct CString {
  char* ptr = nullptr;
  ~CString() { egotopo_string_free(ptr); }
  std::string str() const { return ptr ? ptr : ""; }
};

[[noreturn]] void fail(int code) {
  std::cerr << "error: " << egotopo_last_error() << "\n";
  std::exit(code);
}

void check(int code) {
  if (code != EGOTOPO_OK) fail(code);
}

// Sets a dotted key ("builder.sigma") in a JSON tree; the value is parsed as
// JSON when possible, else taken as a string.
void set_dotted(json& tree, const std::string& key, const std::string& value) {
  json* at = &tree;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  if (parts.empty()) throw CLI::ValidationError("--set", "empty key");
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) at = &(*at)[parts[i]];
  json parsed = json::parse(value, nullptr, false);
  (*at)[parts.back()] = parsed.is_discarded() ? json(value) : parsed;
}

struct CommonOpts {
  std::string config_file;
  std::vector<std::string> sets;
  long long seed = -1;
  int threads = -1;

  // defaults <- config file <- --seed/--threads <- --set overrides, merged and
  // validated through the library so unknown keys are rejected.
  std::string overrides() const {
    json o = json::object();
    if (!config_file.empty()) {
      std::ifstream in(config_file);
      if (!in) {
        std::cerr << "error: cannot read config file " << config_file << "\n";
        std::exit(EGOTOPO_ERR_USAGE);
      }
      try {
        in >> o;
      } catch (const json::exception& e) {
        std::cerr << "error: bad config file: " << e.what() << "\n";
        std::exit(EGOTOPO_ERR_USAGE);
      }
    }
    if (seed >= 0) o["seed"] = seed;
    if (threads >= 0) o["threads"] = threads;
    for (const auto& kv : sets) {
      auto eq = kv.find('=');
      if (eq == std::string::npos) {
        std::cerr << "error: --set expects key=value, got " << kv << "\n";
        std::exit(EGOTOPO_ERR_USAGE);
      }
      set_dotted(o, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return o.dump();
  }
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_file,
                  "JSON config file merged over built-in defaults");
  cmd->add_option("--set", opts.sets,
                  "override a config key, e.g. --set builder.sigma=0.8")
      ->take_all();
  cmd->add_option("--seed", opts.seed, "global random seed");
  cmd->add_option("--threads", opts.threads, "worker cap (0 = hardware)");
}

// Per-stage epilogue listing the relevant config keys with their defaults.
std::string config_help(const std::vector<std::string>& prefixes) {
  CString defaults;
  if (egotopo_default_config(&defaults.ptr) != EGOTOPO_OK) return "";
  json tree = json::parse(defaults.str());
  static const std::map<std::string, std::string> docs = [] {
    std::map<std::string, std::string> m;
    // Key descriptions mirror egotopo::config_key_docs(); duplicated here
    // because the CLI only links the C API.
    const char* table[][2] = {
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
        {"pairs.temporal_window", "frames; closer pairs are similar"},
        {"pairs.min_inliers", "homography inlier count for similarity"},
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
        {"sim.layers", "similarity MLP weight layers"},
        {"sim.weight_decay", "similarity L2 coupled decay"},
        {"sim.scorer", "mlp (trained checkpoint) or cosine (closed form)"},
        {"sim.cosine_center", "cosine scorer calibration midpoint"},
        {"sim.cosine_temperature", "cosine scorer calibration temperature"},
        {"builder.sigma", "merge threshold"},
        {"builder.margin", "create below sigma - margin"},
        {"builder.score_window", "frames averaged around the query"},
        {"builder.frames_per_visit", "sample frames per visit"},
        {"builder.visit_rep", "visit representative: samples or center"},
        {"builder.videos", "which split to build graphs for: train, eval or all"},
        {"link.threshold_fraction",
         "stop merging below this fraction of mean pairwise similarity"},
        {"link.linkage", "average, single or complete"},
        {"link.epsilon", "additive smoothing for node distributions"},
        {"link.scope", "all (consolidated) or kitchen (combined per kitchen)"},
        {"affordance.variant", "training set: S, M, C, clip_action or kmeans"},
        {"affordance.lr", "learning rate"},
        {"affordance.lr_final", "learning rate after anneal_epoch"},
        {"affordance.anneal_epoch", "epoch at which the rate anneals"},
        {"affordance.epochs", "training epochs"},
        {"affordance.batch_size", "minibatch size"},
        {"affordance.weight_decay", "L2 coupled decay"},
        {"affordance.hidden", "classifier hidden width"},
        {"affordance.kmeans_k", "kmeans cluster count (0 = consolidated nodes)"},
        {"affordance.kmeans_iters", "Lloyd iterations"},
        {"affordance.freq_min", "frequent classes have more training instances"},
        {"affordance.rare_max", "rare classes have fewer training instances"},
        {"anticipation.variant", "gcn, no_gcn, mean_pool or train_dist"},
        {"anticipation.hidden", "node feature width"},
        {"anticipation.lr", "learning rate"},
        {"anticipation.lr_decay_factor", "rate multiplier at decay_epoch"},
        {"anticipation.decay_epoch", "epoch of the single rate decay"},
        {"anticipation.epochs", "training epochs"},
        {"anticipation.batch_size", "minibatch size"},
        {"anticipation.weight_decay", "L2 coupled decay"},
        {"anticipation.horizons", "observed-fraction sweep"},
        {"anticipation.clip_overlap_min", "clip-to-node assignment threshold"},
        {"anticipation.target", "verbs or interactions"},
    };
    for (const auto& row : table) m[row[0]] = row[1];
    return m;
  }();

  std::ostringstream out;
  out << "\nConfig keys (override with --set key=value):\n";
  for (const auto& [key, desc] : docs) {
    bool match = false;
    for (const auto& p : prefixes)
      if (key.rfind(p, 0) == 0) match = true;
    if (!match) continue;
    json* at = &tree;
    std::stringstream ss(key);
    std::string part;
    bool found = true;
    while (std::getline(ss, part, '.')) {
      if (!at->contains(part)) {
        found = false;
        break;
      }
      at = &(*at)[part];
    }
    out << "  " << key;
    if (found) out << " (default " << at->dump() << ")";
    out << "\n      " << desc << "\n";
  }
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"egotopo: topological affordance graphs from egocentric-video "
               "embeddings, with zone linking, affordance prediction and "
               "long-horizon action anticipation"};
  app.require_subcommand(1);
  app.footer("Version " + std::string(egotopo_version()));

  struct {
    CommonOpts common;
    std::string out;
  } synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic benchmark dataset");
  add_common(synth_cmd, synth.common);
  synth_cmd->add_option("--out", synth.out, "output directory")->required();
  synth_cmd->footer(config_help({"seed", "threads", "synth."}));

  struct {
    CommonOpts common;
    std::string out, manifest, corrs;
  } pairs;
  auto* pairs_cmd =
      app.add_subcommand("pairs", "sample similar/dissimilar training frame pairs");
  add_common(pairs_cmd, pairs.common);
  pairs_cmd->add_option("--manifest", pairs.manifest, "dataset manifest")->required();
  pairs_cmd->add_option("--correspondences", pairs.corrs,
                        "keypoint correspondences (JSON-lines)");
  pairs_cmd->add_option("--out", pairs.out, "output directory")->required();
  pairs_cmd->footer(config_help({"seed", "pairs."}));

  struct {
    CommonOpts common;
    std::string out, manifest, pairs_file;
  } train_sim;
  auto* train_sim_cmd =
      app.add_subcommand("train-sim", "train the frame-pair similarity model");
  add_common(train_sim_cmd, train_sim.common);
  train_sim_cmd->add_option("--manifest", train_sim.manifest, "dataset manifest")
      ->required();
  train_sim_cmd->add_option("--pairs", train_sim.pairs_file, "pairs.jsonl")->required();
  train_sim_cmd->add_option("--out", train_sim.out, "output directory")->required();
  train_sim_cmd->footer(config_help({"seed", "sim."}));

  struct {
    CommonOpts common;
    std::string out, manifest, model;
    double sigma = -1.0, margin = -1.0;
  } build;
  auto* build_cmd =
      app.add_subcommand("build-graph", "build per-video topological graphs");
  add_common(build_cmd, build.common);
  build_cmd->add_option("--manifest", build.manifest, "dataset manifest")->required();
  build_cmd->add_option("--model", build.model,
                        "similarity checkpoint (omit for the cosine scorer)");
  build_cmd->add_option("--sigma", build.sigma, "merge threshold (default 0.7)");
  build_cmd->add_option("--margin", build.margin, "hysteresis margin (default 0.3)");
  build_cmd->add_option("--out", build.out, "output directory")->required();
  build_cmd->footer(config_help({"seed", "threads", "builder.", "sim.cosine"}));

  struct {
    CommonOpts common;
    std::string out, manifest, graphs, scope;
    double threshold = -1.0;
  } link;
  auto* link_cmd =
      app.add_subcommand("link", "link zones by functional similarity");
  add_common(link_cmd, link.common);
  link_cmd->add_option("--manifest", link.manifest, "dataset manifest")->required();
  link_cmd->add_option("--graphs", link.graphs, "directory with built graphs")
      ->required();
  link_cmd->add_option("--threshold-fraction", link.threshold,
                       "merge cutoff as a fraction of mean similarity (default 0.4)");
  link_cmd->add_option("--scope", link.scope, "all or kitchen");
  link_cmd->add_option("--out", link.out, "output directory")->required();
  link_cmd->footer(config_help({"seed", "link."}));

  struct {
    CommonOpts common;
    std::string out, manifest, graphs, variant;
  } train_aff;
  auto* train_aff_cmd =
      app.add_subcommand("train-affordance", "train the affordance classifier");
  add_common(train_aff_cmd, train_aff.common);
  train_aff_cmd->add_option("--manifest", train_aff.manifest, "dataset manifest")
      ->required();
  train_aff_cmd->add_option("--graphs", train_aff.graphs,
                            "directory with built graphs (not needed for clip_action)");
  train_aff_cmd->add_option("--variant", train_aff.variant,
                            "S, M, C, clip_action or kmeans");
  train_aff_cmd->add_option("--out", train_aff.out, "output directory")->required();
  train_aff_cmd->footer(config_help({"seed", "affordance.", "link."}));

  struct {
    CommonOpts common;
    std::string out, manifest, model, eval_set;
  } eval_aff;
  auto* eval_aff_cmd =
      app.add_subcommand("eval-affordance", "evaluate affordance mAP on labeled frames");
  add_common(eval_aff_cmd, eval_aff.common);
  eval_aff_cmd->add_option("--manifest", eval_aff.manifest, "dataset manifest")
      ->required();
  eval_aff_cmd->add_option("--model", eval_aff.model, "affordance checkpoint")
      ->required();
  eval_aff_cmd->add_option("--eval-set", eval_aff.eval_set,
                           "labeled frames (JSON-lines)")
      ->required();
  eval_aff_cmd->add_option("--out", eval_aff.out, "output directory")->required();
  eval_aff_cmd->footer(config_help({"affordance.freq_min", "affordance.rare_max"}));

  struct {
    CommonOpts common;
    std::string out, manifest, sim_model, variant;
  } train_ant;
  auto* train_ant_cmd =
      app.add_subcommand("train-anticipation", "train the future-action predictor");
  add_common(train_ant_cmd, train_ant.common);
  train_ant_cmd->add_option("--manifest", train_ant.manifest, "dataset manifest")
      ->required();
  train_ant_cmd->add_option("--sim-model", train_ant.sim_model,
                            "similarity checkpoint for observed graphs (omit for cosine)");
  train_ant_cmd->add_option("--variant", train_ant.variant,
                            "gcn, no_gcn, mean_pool or train_dist");
  train_ant_cmd->add_option("--out", train_ant.out, "output directory")->required();
  train_ant_cmd->footer(config_help({"seed", "threads", "anticipation.", "builder."}));

  struct {
    CommonOpts common;
    std::string out, manifest, model, sim_model;
  } eval_ant;
  auto* eval_ant_cmd = app.add_subcommand(
      "eval-anticipation", "evaluate anticipation mAP over the horizon sweep");
  add_common(eval_ant_cmd, eval_ant.common);
  eval_ant_cmd->add_option("--manifest", eval_ant.manifest, "dataset manifest")
      ->required();
  eval_ant_cmd->add_option("--model", eval_ant.model, "anticipation checkpoint")
      ->required();
  eval_ant_cmd->add_option("--sim-model", eval_ant.sim_model,
                           "similarity checkpoint for observed graphs (omit for cosine)");
  eval_ant_cmd->add_option("--out", eval_ant.out, "output directory")->required();
  eval_ant_cmd->footer(config_help({"anticipation.", "builder."}));

  struct {
    std::string graph, format = "dot", out;
    bool undirected = false;
  } exp;
  auto* export_cmd =
      app.add_subcommand("export", "convert a built graph to DOT or pretty JSON");
  export_cmd->add_option("--graph", exp.graph, "graph JSON file")->required();
  export_cmd->add_option("--format", exp.format, "dot or json");
  export_cmd->add_flag("--undirected", exp.undirected, "merge edge directions");
  export_cmd->add_option("--out-file", exp.out, "output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : EGOTOPO_ERR_USAGE;
  }

  auto opt_cstr = [](const std::string& s) { return s.empty() ? nullptr : s.c_str(); };

  if (synth_cmd->parsed()) {
    check(egotopo_run_synth(synth.common.overrides().c_str(), synth.out.c_str()));
    std::cout << "wrote dataset to " << synth.out << "\n";
  } else if (pairs_cmd->parsed()) {
    check(egotopo_run_pairs(pairs.common.overrides().c_str(), pairs.manifest.c_str(),
                            opt_cstr(pairs.corrs), pairs.out.c_str()));
    std::cout << "wrote pairs to " << pairs.out << "\n";
  } else if (train_sim_cmd->parsed()) {
    check(egotopo_run_train_sim(train_sim.common.overrides().c_str(),
                                train_sim.manifest.c_str(),
                                train_sim.pairs_file.c_str(), train_sim.out.c_str()));
    std::cout << "wrote similarity checkpoint to " << train_sim.out << "\n";
  } else if (build_cmd->parsed()) {
    if (build.sigma >= 0) build.common.sets.push_back("builder.sigma=" + std::to_string(build.sigma));
    if (build.margin >= 0) build.common.sets.push_back("builder.margin=" + std::to_string(build.margin));
    check(egotopo_run_build_graphs(build.common.overrides().c_str(),
                                   build.manifest.c_str(), opt_cstr(build.model),
                                   build.out.c_str()));
    std::cout << "wrote graphs to " << build.out << "\n";
  } else if (link_cmd->parsed()) {
    if (link.threshold >= 0)
      link.common.sets.push_back("link.threshold_fraction=" + std::to_string(link.threshold));
    if (!link.scope.empty()) link.common.sets.push_back("link.scope=" + link.scope);
    check(egotopo_run_link(link.common.overrides().c_str(), link.manifest.c_str(),
                           link.graphs.c_str(), link.out.c_str()));
    std::cout << "wrote linked graphs to " << link.out << "\n";
  } else if (train_aff_cmd->parsed()) {
    if (!train_aff.variant.empty())
      train_aff.common.sets.push_back("affordance.variant=" + train_aff.variant);
    check(egotopo_run_train_affordance(
        train_aff.common.overrides().c_str(), train_aff.manifest.c_str(),
        train_aff.graphs.empty() ? "." : train_aff.graphs.c_str(),
        train_aff.out.c_str()));
    std::cout << "wrote affordance checkpoint to " << train_aff.out << "\n";
  } else if (eval_aff_cmd->parsed()) {
    check(egotopo_run_eval_affordance(
        eval_aff.common.overrides().c_str(), eval_aff.manifest.c_str(),
        eval_aff.model.c_str(), eval_aff.eval_set.c_str(), eval_aff.out.c_str()));
    std::ifstream metrics(eval_aff.out + "/metrics.json");
    std::cout << metrics.rdbuf();
  } else if (train_ant_cmd->parsed()) {
    if (!train_ant.variant.empty())
      train_ant.common.sets.push_back("anticipation.variant=" + train_ant.variant);
    check(egotopo_run_train_anticipation(
        train_ant.common.overrides().c_str(), train_ant.manifest.c_str(),
        opt_cstr(train_ant.sim_model), train_ant.out.c_str()));
    std::cout << "wrote anticipation checkpoint to " << train_ant.out << "\n";
  } else if (eval_ant_cmd->parsed()) {
    check(egotopo_run_eval_anticipation(
        eval_ant.common.overrides().c_str(), eval_ant.manifest.c_str(),
        eval_ant.model.c_str(), opt_cstr(eval_ant.sim_model), eval_ant.out.c_str()));
    std::ifstream metrics(eval_ant.out + "/metrics.json");
    std::cout << metrics.rdbuf();
  } else if (export_cmd->parsed()) {
    check(egotopo_run_export(exp.graph.c_str(), exp.format.c_str(),
                             exp.undirected ? 1 : 0, exp.out.c_str()));
    std::cout << "wrote " << exp.out << "\n";
  }
  return 0;
}
