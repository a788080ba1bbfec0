#include "egotopo/pairgen.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "egotopo/common.hpp"
#include "egotopo/rng.hpp"
#include "json.hpp"

namespace egotopo {

using nlohmann::json;

std::string to_string(PairLabel label) {
  return label == PairLabel::similar ? "similar" : "dissimilar";
}

std::string to_string(PairReason reason) {
  switch (reason) {
    case PairReason::temporal: return "temporal";
    case PairReason::same_clip: return "same_clip";
    case PairReason::homography: return "homography";
    case PairReason::distant_dissimilar: return "distant_dissimilar";
    case PairReason::no_action: return "no_action";
  }
  return "?";
}

void validate(const PairGenConfig& cfg) {
  if (cfg.temporal_window <= 0 || cfg.min_inliers <= 0 || cfg.ransac_iters <= 0 ||
      cfg.inlier_px <= 0.0 || cfg.dissim_min_gap <= 0 || cfg.pairs_per_video <= 0)
    throw UsageError("pair generation thresholds must be positive");
}

namespace {

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

std::uint64_t pair_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

struct VideoClips {
  // Sorted, per-video clip intervals for in-clip and no-action queries.
  std::vector<std::pair<int, int>> intervals;

  bool inside_any(int frame) const {
    for (const auto& [s, e] : intervals)
      if (frame >= s && frame <= e) return true;
    return false;
  }
  bool same_clip(int fa, int fb) const {
    for (const auto& [s, e] : intervals)
      if (fa >= s && fa <= e && fb >= s && fb <= e) return true;
    return false;
  }
};

}  // namespace

std::vector<PairSample> sample_pairs(const Dataset& ds,
                                     const std::vector<Correspondences>& corrs,
                                     const PairGenConfig& cfg) {
  validate(cfg);
  Rng rng(cfg.seed);

  std::vector<PairSample> similar, dissimilar;
  // Iterate videos in id order so output is independent of map internals.
  for (const auto& video_id : ds.video_ids()) {
    const EmbeddingMatrix& video = ds.video(video_id);
    const int T = video.num_frames();
    Rng vrng = rng.derive(Rng::hash_string(video_id));

    VideoClips clips;
    for (const ClipAnnotation* a : ds.clips_of(video_id))
      clips.intervals.emplace_back(a->start_frame, a->stop_frame);

    std::set<std::uint64_t> similar_keys;
    auto push_similar = [&](int fa, int fb, PairReason reason) {
      if (fa == fb) return;
      if (!similar_keys.insert(pair_key(fa, fb)).second) return;
      similar.push_back({video_id, video_id, fa, fb, PairLabel::similar, reason});
    };

    // Temporal positives: anchor + offset within the window.
    if (T >= 2) {
      for (int i = 0; i < cfg.pairs_per_video; ++i) {
        int fa = vrng.uniform_int(0, T - 1);
        int max_off = std::min(cfg.temporal_window - 1, T - 1 - fa);
        if (max_off < 1) continue;
        int fb = fa + vrng.uniform_int(1, max_off);
        push_similar(fa, fb, PairReason::temporal);
      }
    }

    // Same-clip positives, sampled uniformly over each clip interval.
    if (!clips.intervals.empty()) {
      int per_clip = std::max(1, cfg.pairs_per_video /
                                     static_cast<int>(clips.intervals.size()));
      for (const auto& [s, e] : clips.intervals) {
        if (e <= s) continue;
        for (int i = 0; i < per_clip; ++i) {
          int fa = vrng.uniform_int(s, e);
          int fb = vrng.uniform_int(s, e);
          if (fa == fb) continue;
          push_similar(std::min(fa, fb), std::max(fa, fb), PairReason::same_clip);
        }
      }
    }

    // Homography positives from supplied keypoint correspondences.
    for (const Correspondences& c : corrs) {
      if (c.video_id != video_id) continue;
      if (c.size() < 4) continue;  // treated as zero inliers
      RansacConfig rcfg{cfg.ransac_iters, cfg.inlier_px,
                        Rng::splitmix64(cfg.seed ^ pair_key(c.frame_a, c.frame_b))};
      RansacResult r;
      try {
        r = ransac_homography(c, rcfg);
      } catch (const DataError&) {
        continue;
      }
      if (r.inlier_count >= cfg.min_inliers)
        push_similar(c.frame_a, c.frame_b, PairReason::homography);
    }

    // Dissimilar candidates: far apart in time, then either low feature
    // similarity or both frames outside every annotated clip.
    if (T > cfg.dissim_min_gap) {
      int want = cfg.pairs_per_video;
      int attempts = want * 20;
      std::set<std::uint64_t> dis_keys;
      for (int i = 0; i < attempts && want > 0; ++i) {
        int fa = vrng.uniform_int(0, T - 1 - cfg.dissim_min_gap);
        int fb = fa + cfg.dissim_min_gap +
                 vrng.uniform_int(0, T - 1 - fa - cfg.dissim_min_gap);
        if (similar_keys.count(pair_key(fa, fb))) continue;
        if (!dis_keys.insert(pair_key(fa, fb)).second) continue;
        bool no_action = !clips.inside_any(fa) && !clips.inside_any(fb);
        bool low_sim = cosine(video.frame(fa), video.frame(fb)) <=
                       cfg.dissim_max_feature_sim;
        if (!no_action && !low_sim) continue;
        dissimilar.push_back({video_id, video_id, fa, fb, PairLabel::dissimilar,
                              low_sim ? PairReason::distant_dissimilar
                                      : PairReason::no_action});
        --want;
      }
    }
  }

  // Balance classes by downsampling the majority, keeping a seeded subset.
  std::size_t keep = std::min(similar.size(), dissimilar.size());
  auto downsample = [&](std::vector<PairSample>& v) {
    if (v.size() <= keep) return;
    rng.shuffle(v);
    v.resize(keep);
  };
  downsample(similar);
  downsample(dissimilar);

  std::vector<PairSample> out;
  out.reserve(similar.size() + dissimilar.size());
  out.insert(out.end(), similar.begin(), similar.end());
  out.insert(out.end(), dissimilar.begin(), dissimilar.end());
  return out;
}

std::vector<Correspondences> load_correspondences_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("missing file: " + path.string());
  std::vector<Correspondences> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      Correspondences c;
      c.video_id = j.at("video_id").get<std::string>();
      c.frame_a = j.at("frame_a").get<int>();
      c.frame_b = j.at("frame_b").get<int>();
      for (const auto& p : j.at("points_a"))
        c.points_a.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
      for (const auto& p : j.at("points_b"))
        c.points_b.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
      if (c.points_a.size() != c.points_b.size())
        throw DataError("correspondence point lists differ in length at " +
                        path.string() + ":" + std::to_string(lineno));
      for (const auto& p : c.points_a)
        if (!p.allFinite()) throw DataError("non-finite correspondence coordinate");
      for (const auto& p : c.points_b)
        if (!p.allFinite()) throw DataError("non-finite correspondence coordinate");
      out.push_back(std::move(c));
    } catch (const json::exception& e) {
      throw DataError("bad correspondence at " + path.string() + ":" +
                      std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void save_pairs_file(const std::vector<PairSample>& pairs,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& p : pairs) {
    json j = {{"video_a", p.video_a}, {"video_b", p.video_b},
              {"frame_a", p.frame_a}, {"frame_b", p.frame_b},
              {"label", to_string(p.label)}, {"reason", to_string(p.reason)}};
    out << j.dump() << "\n";
  }
}

std::vector<PairSample> load_pairs_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("missing file: " + path.string());
  std::vector<PairSample> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      PairSample p;
      p.video_a = j.at("video_a").get<std::string>();
      p.video_b = j.at("video_b").get<std::string>();
      p.frame_a = j.at("frame_a").get<int>();
      p.frame_b = j.at("frame_b").get<int>();
      std::string label = j.at("label").get<std::string>();
      p.label = label == "similar" ? PairLabel::similar : PairLabel::dissimilar;
      std::string reason = j.at("reason").get<std::string>();
      if (reason == "temporal") p.reason = PairReason::temporal;
      else if (reason == "same_clip") p.reason = PairReason::same_clip;
      else if (reason == "homography") p.reason = PairReason::homography;
      else if (reason == "distant_dissimilar") p.reason = PairReason::distant_dissimilar;
      else if (reason == "no_action") p.reason = PairReason::no_action;
      else throw DataError("unknown pair reason: " + reason);
      out.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw DataError("bad pair at " + path.string() + ":" + std::to_string(lineno) +
                      ": " + e.what());
    }
  }
  return out;
}

}  // namespace egotopo
