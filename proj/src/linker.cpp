#include "egotopo/linker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "egotopo/common.hpp"

namespace egotopo {

void validate(const LinkConfig& cfg) {
  if (!(cfg.threshold_fraction > 0.0 && cfg.threshold_fraction <= 1.0))
    throw UsageError("threshold_fraction must be in (0, 1]");
  if (cfg.epsilon < 0.0) throw UsageError("epsilon must be nonnegative");
}

namespace {

bool overlaps(const ClipAnnotation& a, const Visit& v) {
  return a.start_frame <= v.stop && a.stop_frame >= v.start;
}

Eigen::VectorXd smoothed_histogram(const std::vector<double>& counts, double eps) {
  Eigen::VectorXd h(static_cast<Eigen::Index>(counts.size()));
  double total = 0.0;
  for (double c : counts) total += c;
  if (total == 0.0 && eps == 0.0)
    return Eigen::VectorXd::Constant(h.size(), 1.0 / static_cast<double>(h.size()));
  for (std::size_t i = 0; i < counts.size(); ++i) h(static_cast<Eigen::Index>(i)) = counts[i] + eps;
  return h / h.sum();
}

double kl(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  double d = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) == 0.0) continue;
    d += p(i) * std::log(p(i) / q(i));
  }
  return d;
}

}  // namespace

NodeDistributions node_distributions(const ZoneNode& node,
                                     const std::vector<const ClipAnnotation*>& anns,
                                     const InteractionVocab& vocab, double eps) {
  std::vector<double> verb_counts(vocab.num_verbs(), 0.0);
  std::vector<double> noun_counts(vocab.num_nouns(), 0.0);
  for (const ClipAnnotation* a : anns) {
    bool hit = false;
    for (const Visit& v : node.visits)
      if (overlaps(*a, v)) {
        hit = true;
        break;
      }
    if (!hit) continue;
    verb_counts[a->verb_id] += 1.0;
    noun_counts[a->noun_id] += 1.0;
  }
  NodeDistributions d;
  d.actions = smoothed_histogram(verb_counts, eps);
  d.objects = smoothed_histogram(noun_counts, eps);
  d.epsilon = eps;
  return d;
}

double functional_similarity(const NodeDistributions& a, const NodeDistributions& b) {
  if (a.actions.size() != b.actions.size() || a.objects.size() != b.objects.size())
    throw UsageError("node distributions have mismatched vocabularies");
  double action_term = 0.5 * (kl(a.actions, b.actions) + kl(b.actions, a.actions));
  double object_term = 0.5 * (kl(a.objects, b.objects) + kl(b.objects, a.objects));
  return -0.5 * (action_term + object_term);
}

namespace {

struct FlatNode {
  NodeRef ref;
  const ZoneNode* node = nullptr;
  NodeDistributions dist;
};

double linkage_similarity(const std::vector<std::vector<double>>& sim,
                          const std::vector<int>& a, const std::vector<int>& b,
                          LinkConfig::Linkage linkage) {
  double best_single = -std::numeric_limits<double>::infinity();
  double worst_complete = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (int i : a)
    for (int j : b) {
      double s = sim[i][j];
      best_single = std::max(best_single, s);
      worst_complete = std::min(worst_complete, s);
      sum += s;
    }
  switch (linkage) {
    case LinkConfig::Linkage::single: return best_single;
    case LinkConfig::Linkage::complete: return worst_complete;
    case LinkConfig::Linkage::average: break;
  }
  return sum / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

}  // namespace

ConsolidatedGraph link_nodes(const std::vector<TopoGraph>& graphs, const Dataset& ds,
                             const LinkConfig& cfg) {
  validate(cfg);
  if (graphs.empty()) throw UsageError("link_nodes needs at least one graph");

  // Flatten and order nodes by (video, node id) so the result does not depend
  // on the order graphs were supplied in.
  std::vector<FlatNode> nodes;
  for (const TopoGraph& g : graphs) {
    std::vector<const ClipAnnotation*> anns = ds.clips_of(g.video_id);
    for (const ZoneNode& n : g.nodes)
      nodes.push_back({{g.video_id, n.node_id}, &n,
                       node_distributions(n, anns, ds.vocab, cfg.epsilon)});
  }
  std::sort(nodes.begin(), nodes.end(),
            [](const FlatNode& a, const FlatNode& b) { return a.ref < b.ref; });
  const int n = static_cast<int>(nodes.size());

  std::vector<std::vector<double>> sim(n, std::vector<double>(n, 0.0));
  double mean_sim = 0.0;
  int pairs = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      double s = functional_similarity(nodes[i].dist, nodes[j].dist);
      sim[i][j] = sim[j][i] = s;
      mean_sim += s;
      ++pairs;
    }
  double threshold = pairs > 0 ? cfg.threshold_fraction * (mean_sim / pairs) : 0.0;

  // Clusters as index lists; members stay sorted so tie-breaks are stable.
  std::vector<std::vector<int>> clusters;
  for (int i = 0; i < n; ++i) clusters.push_back({i});

  while (clusters.size() > 1 && pairs > 0) {
    double best = -std::numeric_limits<double>::infinity();
    int bi = -1, bj = -1;
    for (std::size_t i = 0; i < clusters.size(); ++i)
      for (std::size_t j = i + 1; j < clusters.size(); ++j) {
        double s = linkage_similarity(sim, clusters[i], clusters[j], cfg.linkage);
        if (s > best) {
          best = s;
          bi = static_cast<int>(i);
          bj = static_cast<int>(j);
        }
      }
    if (best < threshold) break;
    clusters[bi].insert(clusters[bi].end(), clusters[bj].begin(), clusters[bj].end());
    std::sort(clusters[bi].begin(), clusters[bi].end());
    clusters.erase(clusters.begin() + bj);
  }

  // Order clusters by their smallest member.
  std::sort(clusters.begin(), clusters.end(),
            [](const std::vector<int>& a, const std::vector<int>& b) {
              return a.front() < b.front();
            });

  ConsolidatedGraph out;
  std::map<NodeRef, int> cluster_of;
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    Cluster cluster;
    cluster.cluster_id = static_cast<int>(c);
    std::vector<double> verb_counts(ds.vocab.num_verbs(), 0.0);
    std::vector<double> noun_counts(ds.vocab.num_nouns(), 0.0);
    for (int idx : clusters[c]) {
      const FlatNode& fn = nodes[idx];
      cluster.members.push_back(fn.ref);
      cluster_of[fn.ref] = cluster.cluster_id;
      std::vector<const ClipAnnotation*> anns = ds.clips_of(fn.ref.video_id);
      for (const Visit& v : fn.node->visits)
        cluster.visits.push_back({fn.ref.video_id, v});
      for (const ClipAnnotation* a : anns) {
        for (const Visit& v : fn.node->visits)
          if (overlaps(*a, v)) {
            verb_counts[a->verb_id] += 1.0;
            noun_counts[a->noun_id] += 1.0;
            break;
          }
      }
    }
    cluster.dist.actions = smoothed_histogram(verb_counts, cfg.epsilon);
    cluster.dist.objects = smoothed_histogram(noun_counts, cfg.epsilon);
    cluster.dist.epsilon = cfg.epsilon;
    out.clusters.push_back(std::move(cluster));
  }

  // Aggregate member-graph edges between distinct clusters.
  for (const TopoGraph& g : graphs)
    for (const auto& [edge, count] : g.edges) {
      int cu = cluster_of.at({g.video_id, edge.first});
      int cv = cluster_of.at({g.video_id, edge.second});
      if (cu != cv) out.edges[{cu, cv}] += count;
    }
  return out;
}

std::map<std::string, std::vector<int>> cluster_assignment(
    const ConsolidatedGraph& g, const std::vector<TopoGraph>& graphs) {
  std::map<NodeRef, int> cluster_of;
  for (const Cluster& c : g.clusters)
    for (const NodeRef& ref : c.members) cluster_of[ref] = c.cluster_id;
  std::map<std::string, std::vector<int>> out;
  for (const TopoGraph& graph : graphs) {
    std::vector<int>& v = out[graph.video_id];
    v.resize(graph.nodes.size(), -1);
    for (const ZoneNode& n : graph.nodes)
      v[n.node_id] = cluster_of.at({graph.video_id, n.node_id});
  }
  return out;
}

}  // namespace egotopo
