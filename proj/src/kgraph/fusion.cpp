#include "skg/kgraph/fusion.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>

#include "skg/core/error.hpp"
#include "skg/core/text.hpp"

namespace skg::kgraph {

nlohmann::json to_json(const AliasGroup& g) {
  return {{"etype", std::string(to_string(g.etype))},
          {"canonical", g.canonical},
          {"members", g.members},
          {"provenance", g.provenance}};
}

AliasGroup alias_group_from_json(const nlohmann::json& j) {
  AliasGroup g;
  auto et = entity_type_from_string(j.at("etype").get<std::string>());
  if (!et) throw Error(ErrorCode::MalformedEncoding, "unknown etype in alias group");
  g.etype = *et;
  g.canonical = j.at("canonical").get<std::string>();
  g.members = j.at("members").get<std::vector<std::string>>();
  g.provenance = j.value("provenance", "");
  return g;
}

void AliasTable::add(AliasGroup group) {
  group.canonical = normalize_description(group.canonical, group.etype);
  std::set<std::string> members{group.canonical};
  for (const auto& m : group.members) {
    if (trim(m).empty()) continue;
    members.insert(normalize_description(m, group.etype));
  }
  for (const auto& m : members) {
    auto it = member_of_.find({group.etype, m});
    if (it != member_of_.end()) {
      throw Error(ErrorCode::ConflictingGroup, "'" + m + "' (" + std::string(to_string(group.etype)) +
                                                   ") is in both '" + groups_[it->second].canonical + "' and '" +
                                                   group.canonical + "'");
    }
  }
  group.members.assign(members.begin(), members.end());
  for (const auto& m : group.members) member_of_[{group.etype, m}] = groups_.size();
  groups_.push_back(std::move(group));
}

AliasTable AliasTable::load_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::IoError, "cannot open alias file '" + file.string() + "'");
  AliasTable table;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto parts = split(t, '|');
    if (parts.size() != 3) {
      throw Error(ErrorCode::ValidationError,
                  file.string() + ":" + std::to_string(lineno) + ": expected 'etype | canonical | members'");
    }
    auto et = entity_type_from_string(trim(parts[0]));
    if (!et) {
      throw Error(ErrorCode::ValidationError,
                  file.string() + ":" + std::to_string(lineno) + ": unknown entity type '" +
                      std::string(trim(parts[0])) + "'");
    }
    AliasGroup g;
    g.etype = *et;
    g.canonical = std::string(trim(parts[1]));
    for (const auto& m : split(parts[2], ',')) {
      if (!trim(m).empty()) g.members.emplace_back(trim(m));
    }
    g.provenance = "curated:" + file.filename().string() + ":" + std::to_string(lineno);
    table.add(std::move(g));
  }
  return table;
}

AliasTable AliasTable::from_graph(const OntologyGraph& graph) {
  // Union-find over (etype, name) keys.
  std::map<std::pair<EntityType, std::string>, std::size_t> key_id;
  std::vector<std::size_t> parent;
  std::vector<std::pair<EntityType, std::string>> keys;
  auto id_of = [&](EntityType et, const std::string& name) {
    auto [it, fresh] = key_id.try_emplace({et, name}, parent.size());
    if (fresh) {
      parent.push_back(parent.size());
      keys.emplace_back(et, name);
    }
    return it->second;
  };
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::map<std::size_t, NodeId> owner;  // key -> node id that declared it canonical
  for (const auto& [id, node] : graph.nodes()) {
    auto it = node.attributes.find("aliases");
    if (it == node.attributes.end()) continue;
    std::size_t c = id_of(node.etype, node.description);
    if (!owner.contains(c) || id < owner[c]) owner[c] = id;
    for (const auto& [value, tags] : it->second) {
      if (trim(value).empty()) continue;
      std::size_t m = id_of(node.etype, normalize_description(value, node.etype));
      parent[find(m)] = find(c);
    }
  }
  std::map<std::size_t, std::vector<std::size_t>> components;
  for (std::size_t k = 0; k < parent.size(); ++k) components[find(k)].push_back(k);

  std::vector<AliasGroup> groups;
  for (const auto& [root, members] : components) {
    if (members.size() < 2) continue;
    std::optional<NodeId> best;
    std::size_t canon = members.front();
    for (auto k : members) {
      auto o = owner.find(k);
      if (o != owner.end() && (!best || o->second < *best)) {
        best = o->second;
        canon = k;
      }
    }
    AliasGroup g;
    g.etype = keys[canon].first;
    g.canonical = keys[canon].second;
    for (auto k : members) g.members.push_back(keys[k].second);
    g.provenance = "structured:" + best.value_or("");
    groups.push_back(std::move(g));
  }
  std::sort(groups.begin(), groups.end(), [](const AliasGroup& a, const AliasGroup& b) {
    return std::tie(a.etype, a.canonical) < std::tie(b.etype, b.canonical);
  });
  AliasTable table;
  for (auto& g : groups) table.add(std::move(g));
  return table;
}

std::vector<std::string> AliasTable::absorb(const AliasTable& other) {
  std::vector<std::string> skipped;
  for (const auto& g : other.groups()) {
    bool conflict = std::any_of(g.members.begin(), g.members.end(),
                                [&](const std::string& m) { return member_of_.contains({g.etype, m}); });
    if (conflict) {
      skipped.push_back(g.provenance);
    } else {
      add(g);
    }
  }
  return skipped;
}

std::size_t FusionReport::groups_applied() const {
  return static_cast<std::size_t>(std::count_if(groups.begin(), groups.end(), [](const auto& g) { return g.applied; }));
}

std::size_t FusionReport::nodes_removed() const {
  return std::accumulate(groups.begin(), groups.end(), std::size_t{0},
                         [](std::size_t s, const GroupOutcome& g) { return s + g.members_fused; });
}

nlohmann::json FusionReport::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& g : groups) {
    arr.push_back({{"canonical", g.canonical},
                   {"etype", std::string(to_string(g.etype))},
                   {"applied", g.applied},
                   {"members_fused", g.members_fused},
                   {"edges_repointed", g.edges_repointed},
                   {"duplicates_collapsed", g.duplicates_collapsed}});
  }
  return {{"groups", arr}, {"groups_applied", groups_applied()}, {"nodes_removed", nodes_removed()}};
}

GroupOutcome fuse_group(OntologyGraph& graph, const AliasGroup& group) {
  GroupOutcome out;
  out.canonical = group.canonical;
  out.etype = group.etype;
  std::vector<NodeId> matching;
  for (const auto& m : group.members) {
    if (const Node* n = graph.find(group.etype, m)) matching.push_back(n->id);
  }
  if (matching.size() < 2) return out;

  auto [canon_id, created] = graph.upsert_node(group.etype, group.canonical, {}, {});
  (void)created;
  for (const auto& member_id : matching) {
    if (member_id == canon_id) continue;
    Node member = *graph.find(member_id);
    NodeAttributes extra = member.attributes;
    extra[kAliasOfAttribute][member.description].insert(kFusionTag);
    graph.upsert_node(group.etype, group.canonical, extra, member.source_report_ids);

    std::vector<std::pair<EdgeKey, EdgeAttributes>> moved;
    for (const auto& key : graph.incident_edges(member_id)) {
      EdgeKey nk = key;
      if (nk.src == member_id) nk.src = canon_id;
      if (nk.dst == member_id) nk.dst = canon_id;
      moved.emplace_back(std::move(nk), graph.edges().at(key));
    }
    graph.remove_node(member_id);
    for (auto& [key, attrs] : moved) {
      if (graph.insert_edge(key, attrs)) {
        ++out.edges_repointed;
      } else {
        ++out.duplicates_collapsed;
      }
    }
    ++out.members_fused;
  }
  out.applied = true;
  return out;
}

FusionReport fuse_aliases(OntologyGraph& graph, const AliasTable& table) {
  FusionReport report;
  for (const auto& g : table.groups()) report.groups.push_back(fuse_group(graph, g));
  return report;
}

}  // namespace skg::kgraph
