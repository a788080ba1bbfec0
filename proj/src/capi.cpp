#include "egotopo.h"

#include <cstring>
#include <memory>
#include <string>

#include "egotopo/checkpoint.hpp"
#include "egotopo/common.hpp"
#include "egotopo/config.hpp"
#include "egotopo/dataset.hpp"
#include "egotopo/serialize.hpp"
#include "egotopo/simnet.hpp"
#include "egotopo/stages.hpp"
#include "egotopo/topo.hpp"
#include "json.hpp"

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return EGOTOPO_OK;
  } catch (const egotopo::UsageError& e) {
    g_last_error = e.what();
    return EGOTOPO_ERR_USAGE;
  } catch (const egotopo::DataError& e) {
    g_last_error = e.what();
    return EGOTOPO_ERR_DATA;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return EGOTOPO_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return EGOTOPO_ERR_INTERNAL;
  }
}

std::string opt(const char* s) { return s ? std::string(s) : std::string(); }

const char* require(const char* s, const char* name) {
  if (!s) throw egotopo::UsageError(std::string(name) + " must not be NULL");
  return s;
}

}  // namespace

struct egotopo_dataset {
  egotopo::Dataset ds;
};

struct egotopo_model {
  egotopo::SimilarityModel sim;
  std::string kind;
};

struct egotopo_graph {
  egotopo::TopoGraph graph;
};

extern "C" {

const char* egotopo_version(void) { return "1.0.0"; }

const char* egotopo_last_error(void) { return g_last_error.c_str(); }

void egotopo_string_free(char* s) { delete[] s; }

int egotopo_default_config(char** out_json) {
  return guarded([&] {
    require(reinterpret_cast<const char*>(out_json), "out_json");
    *out_json = dup_string(egotopo::default_config_json());
  });
}

int egotopo_merge_config(const char* base_json, const char* overrides_json,
                         char** out_json) {
  return guarded([&] {
    require(reinterpret_cast<const char*>(out_json), "out_json");
    *out_json = dup_string(egotopo::merge_config_json(
        require(base_json, "base_json"), opt(overrides_json)));
  });
}

int egotopo_run_synth(const char* overrides_json, const char* out_dir) {
  return guarded([&] {
    egotopo::stages::run_synth(opt(overrides_json), require(out_dir, "out_dir"));
  });
}

int egotopo_run_pairs(const char* overrides_json, const char* manifest,
                      const char* correspondences, const char* out_dir) {
  return guarded([&] {
    egotopo::stages::run_pairs(opt(overrides_json), require(manifest, "manifest"),
                               opt(correspondences), require(out_dir, "out_dir"));
  });
}

int egotopo_run_train_sim(const char* overrides_json, const char* manifest,
                          const char* pairs_file, const char* out_dir) {
  return guarded([&] {
    egotopo::stages::run_train_sim(opt(overrides_json), require(manifest, "manifest"),
                                   require(pairs_file, "pairs_file"),
                                   require(out_dir, "out_dir"));
  });
}

int egotopo_run_build_graphs(const char* overrides_json, const char* manifest,
                             const char* sim_checkpoint, const char* out_dir) {
  return guarded([&] {
    egotopo::stages::run_build_graphs(opt(overrides_json), require(manifest, "manifest"),
                                      opt(sim_checkpoint), require(out_dir, "out_dir"));
  });
}

int egotopo_run_link(const char* overrides_json, const char* manifest,
                     const char* graphs_dir, const char* out_dir) {
  return guarded([&] {
    egotopo::stages::run_link(opt(overrides_json), require(manifest, "manifest"),
                              require(graphs_dir, "graphs_dir"),
                              require(out_dir, "out_dir"));
  });
}

int egotopo_run_train_affordance(const char* overrides_json, const char* manifest,
                                 const char* graphs_dir, const char* out_dir) {
  return guarded([&] {
    egotopo::stages::run_train_affordance(
        opt(overrides_json), require(manifest, "manifest"),
        require(graphs_dir, "graphs_dir"), require(out_dir, "out_dir"));
  });
}

int egotopo_run_eval_affordance(const char* overrides_json, const char* manifest,
                                const char* checkpoint, const char* eval_file,
                                const char* out_dir) {
  return guarded([&] {
    egotopo::stages::run_eval_affordance(
        opt(overrides_json), require(manifest, "manifest"),
        require(checkpoint, "checkpoint"), require(eval_file, "eval_file"),
        require(out_dir, "out_dir"));
  });
}

int egotopo_run_train_anticipation(const char* overrides_json, const char* manifest,
                                   const char* sim_checkpoint, const char* out_dir) {
  return guarded([&] {
    egotopo::stages::run_train_anticipation(
        opt(overrides_json), require(manifest, "manifest"), opt(sim_checkpoint),
        require(out_dir, "out_dir"));
  });
}

int egotopo_run_eval_anticipation(const char* overrides_json, const char* manifest,
                                  const char* checkpoint, const char* sim_checkpoint,
                                  const char* out_dir) {
  return guarded([&] {
    egotopo::stages::run_eval_anticipation(
        opt(overrides_json), require(manifest, "manifest"),
        require(checkpoint, "checkpoint"), opt(sim_checkpoint),
        require(out_dir, "out_dir"));
  });
}

int egotopo_run_export(const char* graph_json_path, const char* format, int undirected,
                       const char* out_path) {
  return guarded([&] {
    egotopo::stages::run_export(require(graph_json_path, "graph_json_path"),
                                require(format, "format"), undirected != 0,
                                require(out_path, "out_path"));
  });
}

int egotopo_dataset_open(const char* manifest_path, egotopo_dataset** out) {
  return guarded([&] {
    require(reinterpret_cast<const char*>(out), "out");
    auto handle = std::make_unique<egotopo_dataset>();
    handle->ds = egotopo::load_dataset(require(manifest_path, "manifest_path"));
    *out = handle.release();
  });
}

void egotopo_dataset_close(egotopo_dataset* ds) { delete ds; }

int egotopo_dataset_summary(const egotopo_dataset* ds, char** out_json) {
  return guarded([&] {
    require(reinterpret_cast<const char*>(ds), "ds");
    require(reinterpret_cast<const char*>(out_json), "out_json");
    nlohmann::json j;
    j["videos"] = ds->ds.videos.size();
    j["annotations"] = ds->ds.annotations.size();
    j["dim"] = ds->ds.dim();
    j["kitchens"] = ds->ds.kitchen_ids().size();
    j["verbs"] = ds->ds.vocab.num_verbs();
    j["nouns"] = ds->ds.vocab.num_nouns();
    j["interactions"] = ds->ds.vocab.num_interactions();
    *out_json = dup_string(j.dump());
  });
}

int egotopo_model_open(const char* checkpoint_path, egotopo_model** out) {
  return guarded([&] {
    require(reinterpret_cast<const char*>(out), "out");
    const char* path = require(checkpoint_path, "checkpoint_path");
    egotopo::Checkpoint ckpt = egotopo::load_checkpoint(path);
    auto handle = std::make_unique<egotopo_model>();
    handle->kind = egotopo::checkpoint_kind(ckpt);
    if (handle->kind == "simnet")
      handle->sim = egotopo::SimilarityModel::load(path);
    *out = handle.release();
  });
}

void egotopo_model_close(egotopo_model* m) { delete m; }

int egotopo_model_kind(const egotopo_model* m, char** out_kind) {
  return guarded([&] {
    require(reinterpret_cast<const char*>(m), "m");
    require(reinterpret_cast<const char*>(out_kind), "out_kind");
    *out_kind = dup_string(m->kind);
  });
}

int egotopo_sim_score(const egotopo_model* m, const float* a, const float* b,
                      int32_t dim, double* out_score) {
  return guarded([&] {
    require(reinterpret_cast<const char*>(m), "m");
    require(reinterpret_cast<const char*>(a), "a");
    require(reinterpret_cast<const char*>(b), "b");
    require(reinterpret_cast<const char*>(out_score), "out_score");
    if (m->kind != "simnet")
      throw egotopo::UsageError("checkpoint is not a similarity model");
    if (dim != m->sim.dim())
      throw egotopo::UsageError("embedding dimension does not match the model");
    Eigen::VectorXd va(dim), vb(dim);
    for (int i = 0; i < dim; ++i) {
      va(i) = a[i];
      vb(i) = b[i];
    }
    *out_score = m->sim.score(va, vb);
  });
}

int egotopo_graph_build(const egotopo_dataset* ds, const char* video_id,
                        const egotopo_model* sim_model, const char* overrides_json,
                        egotopo_graph** out) {
  return guarded([&] {
    require(reinterpret_cast<const char*>(ds), "ds");
    require(reinterpret_cast<const char*>(out), "out");
    nlohmann::json cfg =
        nlohmann::json::parse(egotopo::effective_config_json(opt(overrides_json)));
    const nlohmann::json& b = cfg.at("builder");
    egotopo::BuilderConfig bcfg;
    bcfg.sigma = b.at("sigma").get<double>();
    bcfg.margin = b.at("margin").get<double>();
    bcfg.score_window = b.at("score_window").get<int>();
    bcfg.frames_per_visit = b.at("frames_per_visit").get<int>();
    bcfg.visit_rep = b.at("visit_rep").get<std::string>() == "center"
                         ? egotopo::BuilderConfig::VisitRep::center
                         : egotopo::BuilderConfig::VisitRep::samples;

    std::unique_ptr<egotopo::PairScorer> scorer;
    if (sim_model) {
      if (sim_model->kind != "simnet")
        throw egotopo::UsageError("checkpoint is not a similarity model");
      scorer = std::make_unique<egotopo::SimilarityModel>(sim_model->sim);
    } else {
      const nlohmann::json& s = cfg.at("sim");
      scorer = std::make_unique<egotopo::CosineScorer>(
          s.at("cosine_center").get<double>(), s.at("cosine_temperature").get<double>());
    }
    auto handle = std::make_unique<egotopo_graph>();
    handle->graph = egotopo::build_graph(
        ds->ds.video(require(video_id, "video_id")), *scorer, bcfg);
    *out = handle.release();
  });
}

void egotopo_graph_close(egotopo_graph* g) { delete g; }

int egotopo_graph_json(const egotopo_graph* g, char** out_json) {
  return guarded([&] {
    require(reinterpret_cast<const char*>(g), "g");
    require(reinterpret_cast<const char*>(out_json), "out_json");
    *out_json = dup_string(egotopo::graph_to_json(g->graph));
  });
}

int egotopo_graph_dot(const egotopo_graph* g, int undirected, char** out_dot) {
  return guarded([&] {
    require(reinterpret_cast<const char*>(g), "g");
    require(reinterpret_cast<const char*>(out_dot), "out_dot");
    *out_dot = dup_string(egotopo::graph_to_dot(g->graph, undirected != 0));
  });
}

}  // extern "C"
