#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skg/core/graph.hpp"
#include "skg/kgraph/search_index.hpp"
#include "skg/query/query_parser.hpp"

namespace skg::query {

struct Limits {
  std::size_t default_limit = 50;
  std::size_t max_limit = 500;

  /// Missing → default; above max → max; zero → BadRequest.
  std::size_t clamp(std::optional<std::size_t> requested) const;
};

struct NodeSummary {
  NodeId id;
  EntityType etype = EntityType::Software;
  std::string description;
  std::size_t degree = 0;
  std::map<std::string, std::vector<std::string>> attributes;  // values without source tags
};

struct EdgeSummary {
  NodeId src;
  NodeId dst;
  std::string verb;
  auto operator<=>(const EdgeSummary&) const = default;
};

struct SubgraphView {
  std::vector<NodeSummary> nodes;
  std::vector<EdgeSummary> edges;  // among included nodes, one per (src, dst, verb)
  bool truncated = false;
  std::size_t limit = 0;
  std::optional<std::string> next_cursor;

  std::vector<NodeId> ids() const;
  nlohmann::json to_json() const;
};

/// Read-only query engine over an immutable graph snapshot. All results are
/// deterministic for equal inputs.
class QueryEngine {
 public:
  QueryEngine(std::shared_ptr<const OntologyGraph> graph, nlohmann::json runs = nlohmann::json::array(),
              Limits limits = {});

  const OntologyGraph& graph() const { return *graph_; }
  const Limits& limits() const { return limits_; }

  /// OR-match of the query terms, ranked by (matched terms, degree)
  /// descending then node id. `cursor` is the opaque next_cursor of a
  /// previous page. Throws BadRequest on a blank query or bad cursor.
  SubgraphView search(std::string_view q, std::optional<std::size_t> limit = std::nullopt,
                      std::string_view cursor = {}) const;

  /// Nodes satisfying the predicate in id order. `name` compares against
  /// the normalized description, `type` against the entity type name, `id`
  /// against the node id; other attributes match any value of that key
  /// case-insensitively.
  SubgraphView execute(const QueryAst& ast, std::optional<std::size_t> limit = std::nullopt,
                       std::string_view cursor = {}) const;

  /// Node plus up to `limit` neighbors (id order). Throws NotFound.
  SubgraphView neighbors(const NodeId& id, std::optional<std::size_t> limit = std::nullopt) const;

  /// Full node detail including attribute source tags and incident edges.
  nlohmann::json node_detail(const NodeId& id) const;

  /// Seeded uniform start node, then breadth-first growth in id order up to
  /// `size` nodes. Throws EmptyGraph.
  SubgraphView random_subgraph(std::optional<std::size_t> size, std::uint64_t seed) const;

  /// Node and edge counts per type plus ingestion totals from the run history.
  nlohmann::json stats() const;

 private:
  NodeSummary summarize(const Node& n) const;
  SubgraphView view_of(const std::vector<NodeId>& ids, std::size_t limit, bool truncated) const;

  std::shared_ptr<const OntologyGraph> graph_;
  kgraph::SearchIndex index_;
  nlohmann::json runs_;
  Limits limits_;
};

}  // namespace skg::query
