#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "egotopo/topo.hpp"
#include "egotopo/types.hpp"

namespace egotopo {

// Per-node action (verb) and active-object (noun) probability vectors.
struct NodeDistributions {
  Eigen::VectorXd actions;  // sums to 1
  Eigen::VectorXd objects;  // sums to 1
  double epsilon = 0.0;
};

struct LinkConfig {
  double threshold_fraction = 0.4;  // of the mean pairwise similarity
  enum class Linkage { average, single, complete };
  Linkage linkage = Linkage::average;
  double epsilon = 1e-4;  // additive smoothing before normalization
};

void validate(const LinkConfig& cfg);

// Smoothed histograms of the verbs/nouns of annotations overlapping any visit
// of the node. A node with no overlapping annotations yields the uniform
// distribution.
NodeDistributions node_distributions(const ZoneNode& node,
                                     const std::vector<const ClipAnnotation*>& anns,
                                     const InteractionVocab& vocab, double eps);

// Functional similarity: minus the mean of the symmetrized KL divergences of
// the action and object distributions (natural log). Zero iff identical,
// always <= 0, exactly symmetric.
double functional_similarity(const NodeDistributions& a, const NodeDistributions& b);

struct NodeRef {
  std::string video_id;
  int node_id = 0;

  bool operator<(const NodeRef& o) const {
    return video_id != o.video_id ? video_id < o.video_id : node_id < o.node_id;
  }
  bool operator==(const NodeRef& o) const {
    return video_id == o.video_id && node_id == o.node_id;
  }
};

struct ClusterVisit {
  std::string video_id;
  Visit visit;
};

struct Cluster {
  int cluster_id = 0;
  std::vector<NodeRef> members;      // sorted
  std::vector<ClusterVisit> visits;  // union of member visits
  NodeDistributions dist;            // recomputed over all member visits
};

struct ConsolidatedGraph {
  std::vector<Cluster> clusters;
  std::map<std::pair<int, int>, int> edges;  // aggregated from member edges
};

// Agglomerative clustering over pairwise functional similarity. Merging stops
// when the best inter-cluster similarity falls below threshold_fraction times
// the mean of all initial pairwise similarities. Deterministic: ties prefer
// the pair with the smallest member refs, so the result is independent of the
// input ordering of graphs.
ConsolidatedGraph link_nodes(const std::vector<TopoGraph>& graphs, const Dataset& ds,
                             const LinkConfig& cfg);

// Cluster index for each node of each graph (video_id -> node_id -> cluster).
std::map<std::string, std::vector<int>> cluster_assignment(
    const ConsolidatedGraph& g, const std::vector<TopoGraph>& graphs);

}  // namespace egotopo
