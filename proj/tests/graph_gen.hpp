#pragma once

#include <random>

#include "skg/core/graph.hpp"

namespace skg::test {

/// Random graph with `nodes` nodes of mixed types, about two edges per node,
/// and multi-valued attributes with source tags.
inline OntologyGraph random_graph(std::size_t nodes, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  OntologyGraph g;
  std::vector<NodeId> ids;
  const char* verbs[] = {"USE", "DROP", "CONTAINS", "TARGET", "EXPLOIT"};
  while (ids.size() < nodes) {
    auto etype = static_cast<EntityType>(rng() % kEntityTypeCount);
    std::string desc = "node-" + std::to_string(rng() % 1000000);
    if (etype == EntityType::FilePath) desc = "C:\\Dir\\File" + std::to_string(rng() % 1000000);
    NodeAttributes attrs;
    for (std::size_t k = 0, n = rng() % 3; k < n; ++k) {
      attrs["attr" + std::to_string(k)]["v" + std::to_string(rng() % 5)].insert("r" + std::to_string(rng() % 50));
    }
    auto [id, created] = g.upsert_node(etype, desc, attrs, {"r" + std::to_string(rng() % 50)});
    if (created) ids.push_back(id);
  }
  for (std::size_t i = 0; i < nodes * 2; ++i) {
    EdgeKey key{ids[rng() % ids.size()], ids[rng() % ids.size()], verbs[rng() % 5], "r" + std::to_string(rng() % 50)};
    EdgeAttributes attrs;
    if (rng() % 2) attrs["evidence"] = "sentence " + std::to_string(i);
    g.insert_edge(key, attrs);
  }
  return g;
}

}  // namespace skg::test
