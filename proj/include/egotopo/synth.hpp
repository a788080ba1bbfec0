#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "egotopo/rng.hpp"
#include "egotopo/types.hpp"

namespace egotopo {

// Functional profile shared by zones of the same type across environments.
struct ZoneTypeSpec {
  Eigen::VectorXd action_dist;             // over verbs
  Eigen::VectorXd object_dist;             // over nouns
  std::vector<int> affordance_set;         // interaction ids
  Eigen::VectorXd interaction_dist;        // over affordance_set entries
};

struct ZoneSpec {
  int zone_id = 0;
  int type_id = 0;
  Eigen::VectorXd centroid;
  double noise_scale = 1.0;
  std::vector<int> affordance_set;
  Eigen::VectorXd action_dist;
  Eigen::VectorXd object_dist;
  Eigen::VectorXd interaction_dist;
};

struct SynthConfig {
  int n_zones = 6;
  int dim = 64;
  double separation = 10.0;       // min centroid distance / noise_scale
  double noise_scale = 1.0;
  double dwell_mean = 40.0;       // geometric dwell length mean, frames
  std::vector<std::vector<double>> transition;  // row-stochastic; empty = uniform over other zones
  double active_object_noise = 0.0;  // scale of the sparse foreground offset
  double perturb_fraction = 0.2;     // fraction of frames receiving the offset
  int n_videos = 2;
  int frames_per_video = 1000;
  double fps = 6.0;
  double clips_per_dwell = 1.0;
  std::uint64_t seed = 0;
};

void validate(const SynthConfig& cfg);

// Rejection-samples centroids with pairwise distance >= separation *
// noise_scale and attaches the type profiles round-robin. Throws DataError
// when the separation is infeasible after bounded retries.
std::vector<ZoneSpec> generate_environment(const SynthConfig& cfg,
                                           const std::vector<ZoneTypeSpec>& types,
                                           Rng& rng);

struct SynthVideo {
  EmbeddingMatrix embeddings;
  std::vector<ClipAnnotation> annotations;
  std::vector<int> frame_zone;  // ground-truth zone index per frame
};

// Markov zone sequence with geometric dwells; per-frame embedding is the zone
// centroid plus Gaussian noise plus a sparse low-rank foreground offset.
SynthVideo generate_video(const std::vector<ZoneSpec>& zones, const SynthConfig& cfg,
                          const std::string& video_id,
                          const InteractionVocab& vocab, Rng& rng);

struct AffordanceEvalItem {
  std::string video_id;
  int frame = 0;
  std::vector<int> labels;  // interaction ids afforded at the frame's zone
};

// A complete generated benchmark: dataset plus every ground-truth artifact
// downstream stages are checked against.
struct SynthBenchmark {
  Dataset dataset;
  std::map<std::string, std::vector<int>> frame_zone;  // video -> zone per frame
  std::map<std::string, std::vector<int>> zone_types;  // kitchen -> type per zone
  std::map<std::string, std::vector<std::vector<int>>> zone_affordances;
  std::vector<AffordanceEvalItem> affordance_eval;
  std::map<std::string, int> video_class;  // anticipation recipe class
};

struct ZoneBenchmarkConfig {
  SynthConfig base;        // one kitchen, base.n_videos train videos
  int eval_videos = 1;
};

// Single kitchen with one interaction per zone; ground truth for zone
// discovery, linking and the end-to-end smoke path.
SynthBenchmark make_zone_benchmark(const ZoneBenchmarkConfig& cfg);

struct AffordanceBenchmarkConfig {
  int n_kitchens = 3;
  int n_types = 4;            // one zone per type per kitchen
  int dim = 64;
  double separation = 10.0;
  double noise_scale = 1.0;
  double active_object_noise = 6.0;
  double dwell_mean = 25.0;
  int frames_per_video = 1500;
  int train_videos_per_kitchen = 2;
  int eval_videos_per_kitchen = 1;
  double clips_per_dwell = 3.0;
  double core_share = 0.88;   // clip mass on the two core interactions of a type
  double fps = 6.0;
  int eval_frames_per_video = 40;
  std::uint64_t seed = 0;
};

// Kitchens share functional zone types. Each type affords six interactions
// built from a type-private verb/noun pool: two core ones demonstrated
// everywhere and four rare ones demonstrated in a single kitchen each, so
// cross-kitchen linking is what completes the label sets.
SynthBenchmark make_affordance_benchmark(const AffordanceBenchmarkConfig& cfg);

struct AnticipationBenchmarkConfig {
  int n_zones = 6;
  int dim = 32;
  double separation = 10.0;
  double noise_scale = 1.0;
  double dwell_mean = 18.0;
  int frames_per_video = 1200;
  int train_videos = 40;
  int eval_videos = 16;
  double clips_per_dwell = 2.0;
  double future_start = 0.55;   // recipe verbs appear after this fraction
  double future_verb_prob = 0.7;
  double fps = 6.0;
  std::uint64_t seed = 0;
};

// Two recipe classes traverse the same zones at the same rates but in
// different cyclic orders, and perform class-specific verbs late in the
// video. Only the traversal edges separate the classes.
SynthBenchmark make_anticipation_benchmark(const AnticipationBenchmarkConfig& cfg);

// Uniform-over-others transition matrix (the default when cfg.transition is
// empty) and a cycle transition visiting zones in the given order.
std::vector<std::vector<double>> uniform_transition(int n_zones);
std::vector<std::vector<double>> cycle_transition(const std::vector<int>& order);

}  // namespace egotopo
