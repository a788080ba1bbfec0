#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "egotopo/simnet.hpp"
#include "egotopo/types.hpp"

namespace egotopo {

struct Visit {
  int start = 0;  // inclusive
  int stop = 0;   // inclusive

  int length() const { return stop - start + 1; }
  int center() const { return start + (stop - start) / 2; }
  bool contains(int frame) const { return frame >= start && frame <= stop; }
};

struct ZoneNode {
  int node_id = 0;
  std::vector<Visit> visits;                    // disjoint, time-ordered
  std::vector<std::vector<int>> sample_frames;  // per visit, scoring frames
};

struct TopoGraph {
  std::string video_id;
  int num_frames = 0;
  std::vector<ZoneNode> nodes;
  std::map<std::pair<int, int>, int> edges;  // directed (src, dst) -> traversals
  std::vector<int> ignored_frames;

  // node id for an assigned frame, -1 for ignored.
  std::vector<int> frame_assignment() const;
  int total_visits() const;
};

struct BuilderConfig {
  double sigma = 0.7;       // merge above
  double margin = 0.3;      // create below sigma - margin; in between: ignore
  int score_window = 9;     // frames averaged around the query frame
  int frames_per_visit = 20;
  std::uint64_t seed = 0;   // reserved; visit sampling is deterministic
  enum class VisitRep { samples, center };
  VisitRep visit_rep = VisitRep::samples;
};

void validate(const BuilderConfig& cfg);

// Evenly spaced representative frames of [start, stop]; all frames when the
// visit is shorter than max_count.
std::vector<int> visit_sample_frames(int start, int stop, int max_count);

// Query window around frame t, clipped to [0, num_frames).
std::pair<int, int> score_window_bounds(int t, int num_frames, int window);

// Average frame-to-node similarity: mean over the node's visits of the mean
// scorer output between the query window and each visit's sampled frames.
double frame_node_similarity(const EmbeddingMatrix& video, int t, const ZoneNode& node,
                             const PairScorer& scorer, const BuilderConfig& cfg);

// Online graph construction: starts with a single node holding frame 0, then
// per frame merges with the best node above sigma, creates a new node below
// sigma - margin, and ignores the frame in between. Traversal edges connect
// consecutive distinct assigned nodes.
TopoGraph build_graph(const EmbeddingMatrix& video, const PairScorer& scorer,
                      const BuilderConfig& cfg);

// Structural invariants: assigned frames partition into disjoint ordered
// visits, edges reference nodes, no self-loops. Throws InternalError.
void validate_graph(const TopoGraph& g);

// Assembles the graph a perfect zone oracle would produce from a per-frame
// zone labeling (used by synthetic ground truth and tests).
TopoGraph graph_from_assignment(const std::string& video_id,
                                const std::vector<int>& frame_zone,
                                int frames_per_visit = 20);

}  // namespace egotopo
