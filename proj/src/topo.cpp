#include "egotopo/topo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "egotopo/common.hpp"

namespace egotopo {

std::vector<int> TopoGraph::frame_assignment() const {
  std::vector<int> assign(num_frames, -1);
  for (const auto& node : nodes)
    for (const auto& v : node.visits)
      for (int f = v.start; f <= v.stop; ++f) {
        EGOTOPO_CHECK(assign[f] == -1, "frame assigned to two visits");
        assign[f] = node.node_id;
      }
  return assign;
}

int TopoGraph::total_visits() const {
  int n = 0;
  for (const auto& node : nodes) n += static_cast<int>(node.visits.size());
  return n;
}

void validate(const BuilderConfig& cfg) {
  if (!(cfg.sigma > 0.0 && cfg.sigma <= 1.0))
    throw UsageError("sigma must be in (0, 1]");
  if (!(cfg.margin > 0.0 && cfg.margin < cfg.sigma))
    throw UsageError("margin must satisfy 0 < margin < sigma");
  if (cfg.score_window < 1 || cfg.frames_per_visit < 1)
    throw UsageError("score_window and frames_per_visit must be positive");
}

std::vector<int> visit_sample_frames(int start, int stop, int max_count) {
  int len = stop - start + 1;
  std::vector<int> out;
  if (len <= max_count) {
    out.reserve(len);
    for (int f = start; f <= stop; ++f) out.push_back(f);
    return out;
  }
  out.reserve(max_count);
  for (int i = 0; i < max_count; ++i) {
    double pos = static_cast<double>(i) * (len - 1) / (max_count - 1);
    out.push_back(start + static_cast<int>(std::lround(pos)));
  }
  return out;
}

std::pair<int, int> score_window_bounds(int t, int num_frames, int window) {
  int half_lo = (window - 1) / 2;
  int half_hi = window / 2;
  return {std::max(0, t - half_lo), std::min(num_frames - 1, t + half_hi)};
}

namespace {

std::uint64_t pair_cache_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

std::vector<int> representative_frames(const Visit& v, const BuilderConfig& cfg) {
  if (cfg.visit_rep == BuilderConfig::VisitRep::center) return {v.center()};
  return visit_sample_frames(v.start, v.stop, cfg.frames_per_visit);
}

// Incremental builder state. Scoring a frame against a node averages, over
// the node's visits, the mean scorer output between the query window and the
// visit's sample frames. Per-visit partial sums over each query frame are
// memoized so the sliding window costs one new column per frame; raw pair
// scores are memoized too so reopened queries never hit the scorer twice.
struct VisitState {
  Visit visit;
  std::vector<int> samples;
  std::vector<double> qsum;  // qsum[q] = sum over samples of L(q, s); NaN = unfilled
};

struct NodeBuildState {
  std::vector<VisitState> visits;
};

class FrameScoreEngine {
 public:
  FrameScoreEngine(const EmbeddingMatrix& video, const PairScorer& scorer)
      : video_(video), scorer_(scorer), T_(video.num_frames()) {}

  // Fills qsum[lo..hi] for every visit that needs it, batching scorer calls.
  void prepare(std::vector<NodeBuildState>& nodes, int lo, int hi) {
    batch_.clear();
    fills_.clear();
    for (auto& node : nodes)
      for (auto& vs : node.visits) {
        if (vs.qsum.empty())
          vs.qsum.assign(T_, std::numeric_limits<double>::quiet_NaN());
        for (int q = lo; q <= hi; ++q) {
          if (!std::isnan(vs.qsum[q])) continue;
          fills_.push_back({&vs, q});
          for (int f : vs.samples) {
            std::uint64_t key = pair_cache_key(q, f);
            if (pair_cache_.find(key) == pair_cache_.end() &&
                pending_.insert(key).second)
              batch_.emplace_back(q, f);
          }
        }
      }
    pending_.clear();
    if (!batch_.empty()) {
      scorer_.score_pairs(video_, batch_, batch_scores_);
      for (std::size_t i = 0; i < batch_.size(); ++i)
        pair_cache_[pair_cache_key(batch_[i].first, batch_[i].second)] =
            batch_scores_[i];
    }
    for (auto& [vs, q] : fills_) {
      double sum = 0.0;
      for (int f : vs->samples) sum += pair_cache_.at(pair_cache_key(q, f));
      vs->qsum[q] = sum;
    }
  }

  // Mean over visits of (sum over window of qsum) / (window size * samples).
  double node_score(const NodeBuildState& node, int lo, int hi) const {
    double visit_sum = 0.0;
    for (const auto& vs : node.visits) {
      double sum = 0.0;
      for (int q = lo; q <= hi; ++q) sum += vs.qsum[q];
      visit_sum += sum / ((hi - lo + 1) * static_cast<double>(vs.samples.size()));
    }
    return visit_sum / static_cast<double>(node.visits.size());
  }

 private:
  const EmbeddingMatrix& video_;
  const PairScorer& scorer_;
  int T_;
  std::unordered_map<std::uint64_t, double> pair_cache_;
  std::unordered_set<std::uint64_t> pending_;
  std::vector<std::pair<int, int>> batch_;
  std::vector<double> batch_scores_;
  std::vector<std::pair<VisitState*, int>> fills_;
};

}  // namespace

double frame_node_similarity(const EmbeddingMatrix& video, int t, const ZoneNode& node,
                             const PairScorer& scorer, const BuilderConfig& cfg) {
  EGOTOPO_CHECK(!node.visits.empty(), "node without visits");
  auto [lo, hi] = score_window_bounds(t, video.num_frames(), cfg.score_window);
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> visit_sample_count;
  for (const auto& v : node.visits) {
    std::vector<int> samples = representative_frames(v, cfg);
    for (int q = lo; q <= hi; ++q)
      for (int f : samples) pairs.emplace_back(q, f);
    visit_sample_count.push_back(static_cast<int>(samples.size()));
  }
  std::vector<double> scores;
  scorer.score_pairs(video, pairs, scores);
  double visit_sum = 0.0;
  std::size_t at = 0;
  for (int ns : visit_sample_count) {
    double sum = 0.0;
    for (int q = lo; q <= hi; ++q) {
      double qs = 0.0;
      for (int i = 0; i < ns; ++i) qs += scores[at++];
      sum += qs;
    }
    visit_sum += sum / ((hi - lo + 1) * static_cast<double>(ns));
  }
  return visit_sum / static_cast<double>(node.visits.size());
}

TopoGraph build_graph(const EmbeddingMatrix& video, const PairScorer& scorer,
                      const BuilderConfig& cfg) {
  validate(cfg);
  const int T = video.num_frames();
  if (T < 1) throw DataError("cannot build a graph from an empty video");

  FrameScoreEngine engine(video, scorer);
  std::vector<NodeBuildState> nodes;
  auto open_visit = [&](int frame) {
    VisitState vs;
    vs.visit = {frame, frame};
    vs.samples = representative_frames(vs.visit, cfg);
    return vs;
  };
  nodes.push_back({{open_visit(0)}});
  std::vector<int> ignored;
  std::map<std::pair<int, int>, int> edges;
  int last_node = 0;

  for (int t = 1; t < T; ++t) {
    auto [lo, hi] = score_window_bounds(t, T, cfg.score_window);
    engine.prepare(nodes, lo, hi);

    double best = -1.0;
    int best_node = -1;
    for (std::size_t n = 0; n < nodes.size(); ++n) {
      double s = engine.node_score(nodes[n], lo, hi);
      if (s > best) {  // ties keep the lowest node id
        best = s;
        best_node = static_cast<int>(n);
      }
    }

    int current = -1;
    if (best > cfg.sigma) {
      VisitState& last_visit = nodes[best_node].visits.back();
      if (last_visit.visit.stop == t - 1) {
        last_visit.visit.stop = t;
        last_visit.samples = representative_frames(last_visit.visit, cfg);
        last_visit.qsum.clear();  // samples changed; partial sums are stale
      } else {
        nodes[best_node].visits.push_back(open_visit(t));
      }
      current = best_node;
    } else if (best < cfg.sigma - cfg.margin) {
      nodes.push_back({{open_visit(t)}});
      current = static_cast<int>(nodes.size()) - 1;
    } else {
      ignored.push_back(t);
      continue;  // uncertain: no structure, last assigned node persists
    }

    if (current != last_node) ++edges[{last_node, current}];
    last_node = current;
  }

  TopoGraph g;
  g.video_id = video.video_id;
  g.num_frames = T;
  g.nodes.reserve(nodes.size());
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    ZoneNode zn;
    zn.node_id = static_cast<int>(n);
    for (auto& vs : nodes[n].visits) {
      zn.visits.push_back(vs.visit);
      zn.sample_frames.push_back(std::move(vs.samples));
    }
    g.nodes.push_back(std::move(zn));
  }
  g.edges = std::move(edges);
  g.ignored_frames = std::move(ignored);
  validate_graph(g);
  return g;
}

void validate_graph(const TopoGraph& g) {
  std::vector<int> assign(g.num_frames, -1);
  for (const auto& node : g.nodes) {
    EGOTOPO_CHECK(!node.visits.empty(), "node without visits");
    int prev_stop = -1;
    for (std::size_t i = 0; i < node.visits.size(); ++i) {
      const Visit& v = node.visits[i];
      EGOTOPO_CHECK(v.start <= v.stop, "inverted visit");
      EGOTOPO_CHECK(v.start > prev_stop, "visits not strictly time-ordered");
      prev_stop = v.stop;
      for (int f = v.start; f <= v.stop; ++f) {
        EGOTOPO_CHECK(f >= 0 && f < g.num_frames, "visit out of range");
        EGOTOPO_CHECK(assign[f] == -1, "frame in two visits");
        assign[f] = node.node_id;
      }
      if (i < node.sample_frames.size())
        for (int f : node.sample_frames[i])
          EGOTOPO_CHECK(v.contains(f), "sample frame outside its visit");
    }
  }
  for (int f : g.ignored_frames)
    EGOTOPO_CHECK(f >= 0 && f < g.num_frames && assign[f] == -1,
                  "ignored frame also assigned");
  int covered = static_cast<int>(g.ignored_frames.size());
  for (int a : assign) covered += (a != -1);
  EGOTOPO_CHECK(covered == g.num_frames, "frames neither assigned nor ignored");
  for (const auto& [edge, count] : g.edges) {
    EGOTOPO_CHECK(edge.first != edge.second, "self-loop edge");
    EGOTOPO_CHECK(edge.first >= 0 && edge.first < static_cast<int>(g.nodes.size()) &&
                      edge.second >= 0 && edge.second < static_cast<int>(g.nodes.size()),
                  "edge references missing node");
    EGOTOPO_CHECK(count > 0, "edge with nonpositive count");
  }
}

TopoGraph graph_from_assignment(const std::string& video_id,
                                const std::vector<int>& frame_zone,
                                int frames_per_visit) {
  TopoGraph g;
  g.video_id = video_id;
  g.num_frames = static_cast<int>(frame_zone.size());
  std::map<int, int> zone_to_node;
  int last_node = -1;
  for (int t = 0; t < g.num_frames; ++t) {
    int zone = frame_zone[t];
    if (zone < 0) {
      g.ignored_frames.push_back(t);
      continue;
    }
    auto [it, inserted] = zone_to_node.emplace(zone, static_cast<int>(g.nodes.size()));
    if (inserted) {
      ZoneNode node;
      node.node_id = it->second;
      g.nodes.push_back(node);
    }
    ZoneNode& node = g.nodes[it->second];
    if (!node.visits.empty() && node.visits.back().stop == t - 1) {
      node.visits.back().stop = t;
    } else {
      node.visits.push_back({t, t});
    }
    if (last_node != -1 && last_node != it->second)
      ++g.edges[{last_node, it->second}];
    last_node = it->second;
  }
  for (auto& node : g.nodes) {
    node.sample_frames.clear();
    for (const auto& v : node.visits)
      node.sample_frames.push_back(visit_sample_frames(v.start, v.stop, frames_per_visit));
  }
  validate_graph(g);
  return g;
}

}  // namespace egotopo
