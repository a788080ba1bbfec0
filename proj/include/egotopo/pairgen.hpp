#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "egotopo/geometry.hpp"
#include "egotopo/types.hpp"

namespace egotopo {

enum class PairLabel { similar, dissimilar };

enum class PairReason {
  temporal,            // separated by fewer than temporal_window frames
  same_clip,           // both frames inside one annotated clip
  homography,          // enough RANSAC inliers between the two frames
  distant_dissimilar,  // far apart in time with low feature similarity
  no_action,           // far apart in time, both outside every clip
};

std::string to_string(PairLabel label);
std::string to_string(PairReason reason);

struct PairSample {
  std::string video_a;
  std::string video_b;
  int frame_a = 0;
  int frame_b = 0;
  PairLabel label = PairLabel::similar;
  PairReason reason = PairReason::temporal;
};

struct PairGenConfig {
  int temporal_window = 15;    // similar when |gap| < temporal_window
  int min_inliers = 10;        // homography criterion threshold
  int ransac_iters = 1000;
  double inlier_px = 3.0;
  int dissim_min_gap = 200;    // dissimilar candidates need |gap| >= this
  double dissim_max_feature_sim = 0.5;  // cosine ceiling for dissimilar pairs
  int pairs_per_video = 200;   // per class, before balancing
  std::uint64_t seed = 0;
};

void validate(const PairGenConfig& cfg);

// Generates a balanced, seeded stream of labeled frame pairs. Correspondence
// entries (optional) contribute homography-similar pairs; a pair that
// qualifies as similar is never also emitted as dissimilar.
std::vector<PairSample> sample_pairs(const Dataset& ds,
                                     const std::vector<Correspondences>& corrs,
                                     const PairGenConfig& cfg);

std::vector<Correspondences> load_correspondences_file(const std::filesystem::path& path);
void save_pairs_file(const std::vector<PairSample>& pairs,
                     const std::filesystem::path& path);
std::vector<PairSample> load_pairs_file(const std::filesystem::path& path);

}  // namespace egotopo
