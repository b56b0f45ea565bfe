#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "skg/core/graph.hpp"

namespace skg::kgraph {

/// Index terms for a piece of text: the lowercased, whitespace-collapsed
/// whole plus each maximal alphanumeric run.
std::set<std::string> index_terms(std::string_view text);

/// Inverted index from terms of node descriptions and attribute values to
/// node ids.
class SearchIndex {
 public:
  static SearchIndex build(const OntologyGraph& graph);

  /// Re-indexes the given nodes; ids no longer in the graph are dropped.
  void update(const OntologyGraph& graph, const std::vector<NodeId>& ids);
  void add_node(const Node& node);
  void remove_node(const NodeId& id);

  /// Nodes indexed under exactly this term (lowercased).
  std::set<NodeId> lookup(std::string_view term) const;

  /// For a free-text query: node id -> number of distinct query terms it
  /// matched.
  std::map<NodeId, std::size_t> match_counts(std::string_view query) const;

  std::size_t term_count() const { return postings_.size(); }
  bool operator==(const SearchIndex& other) const { return postings_ == other.postings_; }

 private:
  std::map<std::string, std::set<NodeId>> postings_;
  std::map<NodeId, std::set<std::string>> terms_of_;
};

}  // namespace skg::kgraph
