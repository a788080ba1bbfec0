#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace egotopo {

// Row-major so the on-disk layout (row-major float32) maps directly.
using FeatureMatrix =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Per-frame feature vectors of one video. Frames are indexed from 0 and all
// indices elsewhere in the pipeline refer to rows of this matrix (i.e. they
// are post-subsampling indices once subsample_fps has run).
struct EmbeddingMatrix {
  std::string video_id;
  double fps = 0.0;
  int dim = 0;
  FeatureMatrix rows;  // num_frames x dim

  int num_frames() const { return static_cast<int>(rows.rows()); }
  Eigen::VectorXd frame(int t) const { return rows.row(t).cast<double>(); }
};

// One labeled interaction interval, frame indices inclusive.
struct ClipAnnotation {
  std::string video_id;
  int start_frame = 0;
  int stop_frame = 0;
  int verb_id = 0;
  int noun_id = 0;

  int center_frame() const { return start_frame + (stop_frame - start_frame) / 2; }
  int length() const { return stop_frame - start_frame + 1; }
};

// Names the verb/noun spaces and the interaction (verb, noun) pairs that make
// up the affordance label space.
struct InteractionVocab {
  std::vector<std::string> verbs;
  std::vector<std::string> nouns;
  std::vector<std::pair<int, int>> interactions;

  int num_verbs() const { return static_cast<int>(verbs.size()); }
  int num_nouns() const { return static_cast<int>(nouns.size()); }
  int num_interactions() const { return static_cast<int>(interactions.size()); }

  // Index into interactions for a (verb, noun) pair, or -1.
  int interaction_id(int verb_id, int noun_id) const {
    for (std::size_t k = 0; k < interactions.size(); ++k)
      if (interactions[k].first == verb_id && interactions[k].second == noun_id)
        return static_cast<int>(k);
    return -1;
  }
};

struct DatasetSplits {
  std::vector<std::string> train;
  std::vector<std::string> eval;
};

// Immutable after load; safe to share read-only across workers.
struct Dataset {
  std::map<std::string, EmbeddingMatrix> videos;
  std::vector<ClipAnnotation> annotations;
  InteractionVocab vocab;
  std::map<std::string, std::string> kitchen_of;
  std::optional<DatasetSplits> splits;

  int dim() const { return videos.empty() ? 0 : videos.begin()->second.dim; }

  const EmbeddingMatrix& video(const std::string& id) const;
  std::vector<const ClipAnnotation*> clips_of(const std::string& video_id) const;
  std::vector<std::string> video_ids() const;
  std::vector<std::string> kitchen_ids() const;
};

}  // namespace egotopo
