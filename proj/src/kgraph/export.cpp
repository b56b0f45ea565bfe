#include "skg/kgraph/export.hpp"

#include <nlohmann/json.hpp>

#include "skg/core/encoding.hpp"

namespace skg::kgraph {

std::size_t export_ndjson(const OntologyGraph& graph, std::ostream& out) {
  std::size_t lines = 0;
  for (const auto& [id, node] : graph.nodes()) {
    auto j = to_json(node);
    j["kind"] = "node";
    out << j.dump() << '\n';
    ++lines;
  }
  auto ref = [&](const NodeId& id) {
    const Node* n = graph.find(id);
    return nlohmann::json{{"id", id}, {"etype", std::string(to_string(n->etype))}, {"description", n->description}};
  };
  for (const auto& [key, attrs] : graph.edges()) {
    nlohmann::json j{{"kind", "triple"},
                     {"subject", ref(key.src)},
                     {"predicate", key.verb},
                     {"object", ref(key.dst)},
                     {"source_report_id", key.source_report_id},
                     {"attributes", attrs}};
    out << j.dump() << '\n';
    ++lines;
  }
  return lines;
}

}  // namespace skg::kgraph
