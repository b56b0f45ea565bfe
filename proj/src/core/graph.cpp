#include "skg/core/graph.hpp"

#include <fmt/format.h>

#include "skg/core/error.hpp"
#include "skg/core/text.hpp"

namespace skg {

NodeId make_node_id(EntityType etype, const std::string& normalized_description) {
  std::string key(to_string(etype));
  key.push_back('\x1f');
  key += normalized_description;
  return "n" + sha256_hex(key).substr(0, 16);
}

const Node* OntologyGraph::find(const NodeId& id) const {
  auto it = nodes_.find(id);
  return it == nodes_.end() ? nullptr : &it->second;
}

const Node* OntologyGraph::find(EntityType etype, const std::string& normalized_description) const {
  auto it = name_index_.find({etype, normalized_description});
  return it == name_index_.end() ? nullptr : find(it->second);
}

std::pair<NodeId, bool> OntologyGraph::upsert_node(EntityType etype,
                                                   const std::string& description,
                                                   const NodeAttributes& attributes,
                                                   const std::set<std::string>& source_report_ids) {
  if (description.empty()) throw Error(ErrorCode::EmptyDescription, "node description is empty");
  NameKey key{etype, description};
  auto it = name_index_.find(key);
  if (it != name_index_.end()) {
    Node& node = nodes_.at(it->second);
    merge_attributes(node.attributes, attributes);
    node.source_report_ids.insert(source_report_ids.begin(), source_report_ids.end());
    return {node.id, false};
  }
  Node node;
  node.id = make_node_id(etype, description);
  node.etype = etype;
  node.description = description;
  node.attributes = attributes;
  node.source_report_ids = source_report_ids;
  NodeId id = node.id;
  name_index_.emplace(std::move(key), id);
  nodes_.emplace(id, std::move(node));
  return {id, true};
}

bool OntologyGraph::insert_edge(const EdgeKey& key, const EdgeAttributes& attributes) {
  if (!nodes_.contains(key.src) || !nodes_.contains(key.dst)) {
    throw Error(ErrorCode::ValidationError,
                fmt::format("edge {} -[{}]-> {} references a missing node", key.src, key.verb,
                            key.dst));
  }
  auto [it, inserted] = edges_.emplace(key, attributes);
  if (inserted) {
    incident_[key.src].insert(key);
    incident_[key.dst].insert(key);
  }
  return inserted;
}

void OntologyGraph::remove_node(const NodeId& id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) return;
  if (auto inc = incident_.find(id); inc != incident_.end()) {
    for (const auto& key : std::set<EdgeKey>(inc->second)) {
      edges_.erase(key);
      const NodeId& other = key.src == id ? key.dst : key.src;
      if (other != id) {
        if (auto o = incident_.find(other); o != incident_.end()) o->second.erase(key);
      }
    }
    incident_.erase(inc);
  }
  name_index_.erase({it->second.etype, it->second.description});
  nodes_.erase(it);
}

std::size_t OntologyGraph::degree(const NodeId& id) const {
  auto it = incident_.find(id);
  return it == incident_.end() ? 0 : it->second.size();
}

std::vector<EdgeKey> OntologyGraph::incident_edges(const NodeId& id) const {
  auto it = incident_.find(id);
  if (it == incident_.end()) return {};
  return {it->second.begin(), it->second.end()};
}

std::size_t merge_attributes(NodeAttributes& into, const NodeAttributes& from) {
  std::size_t added = 0;
  for (const auto& [key, values] : from) {
    auto& dst = into[key];
    for (const auto& [value, tags] : values) {
      auto [slot, created] = dst.try_emplace(value);
      for (const auto& tag : tags) added += slot->second.insert(tag).second ? 1 : 0;
      if (tags.empty() && created) ++added;
    }
  }
  return added;
}

std::size_t attribute_value_count(const NodeAttributes& attrs) {
  std::size_t n = 0;
  for (const auto& [key, values] : attrs) {
    for (const auto& [value, tags] : values) n += tags.empty() ? 1 : tags.size();
  }
  return n;
}

}  // namespace skg
