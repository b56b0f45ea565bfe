#include "skg/kgraph/search_index.hpp"

#include <cctype>

#include "skg/core/text.hpp"

namespace skg::kgraph {

std::set<std::string> index_terms(std::string_view text) {
  std::set<std::string> terms;
  std::string whole = to_lower_ascii(collapse_whitespace(text));
  if (whole.empty()) return terms;
  terms.insert(whole);
  std::string cur;
  for (char c : whole) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      cur.push_back(c);
    } else if (!cur.empty()) {
      terms.insert(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) terms.insert(std::move(cur));
  return terms;
}

SearchIndex SearchIndex::build(const OntologyGraph& graph) {
  SearchIndex idx;
  for (const auto& [id, node] : graph.nodes()) idx.add_node(node);
  return idx;
}

void SearchIndex::update(const OntologyGraph& graph, const std::vector<NodeId>& ids) {
  for (const auto& id : ids) {
    remove_node(id);
    if (const Node* n = graph.find(id)) add_node(*n);
  }
}

void SearchIndex::add_node(const Node& node) {
  auto terms = index_terms(node.description);
  for (const auto& [key, values] : node.attributes) {
    for (const auto& [value, tags] : values) terms.merge(index_terms(value));
  }
  for (const auto& t : terms) postings_[t].insert(node.id);
  terms_of_[node.id].merge(terms);
}

void SearchIndex::remove_node(const NodeId& id) {
  auto it = terms_of_.find(id);
  if (it == terms_of_.end()) return;
  for (const auto& t : it->second) {
    auto p = postings_.find(t);
    if (p == postings_.end()) continue;
    p->second.erase(id);
    if (p->second.empty()) postings_.erase(p);
  }
  terms_of_.erase(it);
}

std::set<NodeId> SearchIndex::lookup(std::string_view term) const {
  auto it = postings_.find(to_lower_ascii(collapse_whitespace(term)));
  return it == postings_.end() ? std::set<NodeId>{} : it->second;
}

std::map<NodeId, std::size_t> SearchIndex::match_counts(std::string_view query) const {
  std::map<NodeId, std::size_t> counts;
  for (const auto& t : index_terms(query)) {
    auto it = postings_.find(t);
    if (it == postings_.end()) continue;
    for (const auto& id : it->second) ++counts[id];
  }
  return counts;
}

}  // namespace skg::kgraph
