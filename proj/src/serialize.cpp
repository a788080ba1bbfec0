#include "egotopo/serialize.hpp"

#include <fstream>
#include <sstream>

#include "egotopo/common.hpp"
#include "json.hpp"

namespace egotopo {

using nlohmann::json;

std::string graph_to_json(const TopoGraph& g) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["video_id"] = g.video_id;
  j["num_frames"] = g.num_frames;
  j["nodes"] = json::array();
  for (const ZoneNode& n : g.nodes) {
    json visits = json::array();
    for (const Visit& v : n.visits) visits.push_back({v.start, v.stop});
    j["nodes"].push_back({{"id", n.node_id}, {"visits", visits}});
  }
  j["edges"] = json::array();
  for (const auto& [edge, count] : g.edges)
    j["edges"].push_back({{"src", edge.first}, {"dst", edge.second}, {"count", count}});
  j["ignored"] = g.ignored_frames;
  return j.dump(2);
}

TopoGraph graph_from_json(const std::string& text) {
  TopoGraph g;
  try {
    json j = json::parse(text);
    if (j.at("schema_version").get<int>() != kSchemaVersion)
      throw DataError("graph schema version mismatch");
    g.video_id = j.at("video_id").get<std::string>();
    g.num_frames = j.at("num_frames").get<int>();
    for (const auto& nj : j.at("nodes")) {
      ZoneNode n;
      n.node_id = nj.at("id").get<int>();
      for (const auto& vj : nj.at("visits"))
        n.visits.push_back({vj.at(0).get<int>(), vj.at(1).get<int>()});
      for (const auto& v : n.visits)
        n.sample_frames.push_back(visit_sample_frames(v.start, v.stop, 20));
      g.nodes.push_back(std::move(n));
    }
    for (const auto& ej : j.at("edges"))
      g.edges[{ej.at("src").get<int>(), ej.at("dst").get<int>()}] =
          ej.at("count").get<int>();
    g.ignored_frames = j.at("ignored").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw DataError(std::string("bad graph JSON: ") + e.what());
  }
  validate_graph(g);
  return g;
}

void save_graph(const TopoGraph& g, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << graph_to_json(g) << "\n";
}

TopoGraph load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("missing file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return graph_from_json(ss.str());
}

std::string graph_to_dot(const TopoGraph& g, bool undirected) {
  std::ostringstream out;
  out << (undirected ? "graph" : "digraph") << " topo {\n";
  out << "  label=\"" << g.video_id << "\";\n";
  for (const ZoneNode& n : g.nodes) {
    int frames = 0;
    for (const Visit& v : n.visits) frames += v.length();
    out << "  n" << n.node_id << " [label=\"zone " << n.node_id << "\\n"
        << n.visits.size() << " visits, " << frames << " frames\"];\n";
  }
  if (undirected) {
    std::map<std::pair<int, int>, int> merged;
    for (const auto& [edge, count] : g.edges) {
      auto key = std::minmax(edge.first, edge.second);
      merged[{key.first, key.second}] += count;
    }
    for (const auto& [edge, count] : merged)
      out << "  n" << edge.first << " -- n" << edge.second << " [label=\"" << count
          << "\", penwidth=" << std::min(8, 1 + count / 2) << "];\n";
  } else {
    for (const auto& [edge, count] : g.edges)
      out << "  n" << edge.first << " -> n" << edge.second << " [label=\"" << count
          << "\", penwidth=" << std::min(8, 1 + count / 2) << "];\n";
  }
  out << "}\n";
  return out.str();
}

std::string consolidated_to_json(const ConsolidatedGraph& g) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["clusters"] = json::array();
  for (const Cluster& c : g.clusters) {
    json members = json::array();
    for (const NodeRef& m : c.members)
      members.push_back({{"video_id", m.video_id}, {"node_id", m.node_id}});
    json visits = json::array();
    for (const ClusterVisit& v : c.visits)
      visits.push_back({{"video_id", v.video_id}, {"start", v.visit.start},
                        {"stop", v.visit.stop}});
    std::vector<double> a(c.dist.actions.data(),
                          c.dist.actions.data() + c.dist.actions.size());
    std::vector<double> o(c.dist.objects.data(),
                          c.dist.objects.data() + c.dist.objects.size());
    j["clusters"].push_back({{"id", c.cluster_id},
                             {"members", members},
                             {"visits", visits},
                             {"a", a},
                             {"o", o}});
  }
  j["edges"] = json::array();
  for (const auto& [edge, count] : g.edges)
    j["edges"].push_back({{"src", edge.first}, {"dst", edge.second}, {"count", count}});
  return j.dump(2);
}

std::vector<AffordanceEvalItem> load_affordance_eval(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("missing file: " + path.string());
  std::vector<AffordanceEvalItem> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      AffordanceEvalItem item;
      item.video_id = j.at("video_id").get<std::string>();
      item.frame = j.at("frame").get<int>();
      item.labels = j.at("labels").get<std::vector<int>>();
      out.push_back(std::move(item));
    } catch (const json::exception& e) {
      throw DataError("bad eval item at " + path.string() + ":" +
                      std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void save_affordance_eval(const std::vector<AffordanceEvalItem>& items,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& item : items) {
    json j = {{"video_id", item.video_id}, {"frame", item.frame},
              {"labels", item.labels}};
    out << j.dump() << "\n";
  }
}

std::string map_result_to_json(const MapResult& r) {
  json j;
  j["all"] = r.all ? json(*r.all) : json(nullptr);
  j["freq"] = r.freq ? json(*r.freq) : json(nullptr);
  j["rare"] = r.rare ? json(*r.rare) : json(nullptr);
  json per_class = json::object();
  for (const auto& [cls, ap] : r.per_class) per_class[std::to_string(cls)] = ap;
  j["per_class_ap"] = per_class;
  return j.dump();
}

}  // namespace egotopo
