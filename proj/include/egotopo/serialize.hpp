#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "egotopo/linker.hpp"
#include "egotopo/metrics.hpp"
#include "egotopo/synth.hpp"
#include "egotopo/topo.hpp"

namespace egotopo {

std::string graph_to_json(const TopoGraph& g);
TopoGraph graph_from_json(const std::string& text);
void save_graph(const TopoGraph& g, const std::filesystem::path& path);
TopoGraph load_graph(const std::filesystem::path& path);

// Graphviz DOT. Node labels carry visit counts, edge labels traversal counts.
std::string graph_to_dot(const TopoGraph& g, bool undirected);

std::string consolidated_to_json(const ConsolidatedGraph& g);

std::vector<AffordanceEvalItem> load_affordance_eval(const std::filesystem::path& path);
void save_affordance_eval(const std::vector<AffordanceEvalItem>& items,
                          const std::filesystem::path& path);

std::string map_result_to_json(const MapResult& r);

}  // namespace egotopo
