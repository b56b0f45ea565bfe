#pragma once

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "skg/core/types.hpp"

namespace skg {

using NodeId = std::string;

/// value -> set of source tags (report ids) asserting it. Values are never
/// overwritten, only unioned.
using AttributeValues = std::map<std::string, std::set<std::string>>;
using NodeAttributes = std::map<std::string, AttributeValues>;
using EdgeAttributes = std::map<std::string, std::string>;

struct Node {
  NodeId id;
  EntityType etype = EntityType::Software;
  std::string description;
  NodeAttributes attributes;
  std::set<std::string> source_report_ids;

  bool operator==(const Node&) const = default;
};

struct EdgeKey {
  NodeId src;
  NodeId dst;
  std::string verb;
  std::string source_report_id;

  auto operator<=>(const EdgeKey&) const = default;
};

struct Edge {
  EdgeKey key;
  EdgeAttributes attributes;
  bool operator==(const Edge&) const = default;
};

/// Deterministic id for (etype, normalized description).
NodeId make_node_id(EntityType etype, const std::string& normalized_description);

/// Typed property graph. Node identity is (etype, normalized description);
/// edge identity is (src, dst, verb, source_report_id).
class OntologyGraph {
 public:
  using NameKey = std::pair<EntityType, std::string>;

  const std::map<NodeId, Node>& nodes() const { return nodes_; }
  const std::map<EdgeKey, EdgeAttributes>& edges() const { return edges_; }
  const std::map<NameKey, NodeId>& name_index() const { return name_index_; }

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  bool empty() const { return nodes_.empty(); }

  const Node* find(const NodeId& id) const;
  const Node* find(EntityType etype, const std::string& normalized_description) const;

  /// Unions attributes and source ids into the node keyed by (etype,
  /// description), creating it if needed. `description` must already be
  /// normalized. Returns the node id and whether a node was created.
  std::pair<NodeId, bool> upsert_node(EntityType etype, const std::string& description,
                                      const NodeAttributes& attributes,
                                      const std::set<std::string>& source_report_ids);

  /// Returns true when the edge was new. Attributes of an existing edge are
  /// left alone. Throws ValidationError when an endpoint is missing.
  bool insert_edge(const EdgeKey& key, const EdgeAttributes& attributes = {});

  /// Removes a node with all incident edges.
  void remove_node(const NodeId& id);

  std::size_t degree(const NodeId& id) const;
  /// Edge keys touching `id` (as src or dst), sorted.
  std::vector<EdgeKey> incident_edges(const NodeId& id) const;

  bool operator==(const OntologyGraph& other) const {
    return nodes_ == other.nodes_ && edges_ == other.edges_;
  }

 private:
  std::map<NodeId, Node> nodes_;
  std::map<EdgeKey, EdgeAttributes> edges_;
  std::map<NameKey, NodeId> name_index_;
  std::map<NodeId, std::set<EdgeKey>> incident_;
};

/// Unions `from` into `into`. Returns the number of (key, value, tag) triples added.
std::size_t merge_attributes(NodeAttributes& into, const NodeAttributes& from);
std::size_t attribute_value_count(const NodeAttributes& attrs);

}  // namespace skg
