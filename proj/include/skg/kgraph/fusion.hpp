#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skg/core/graph.hpp"
#include "skg/core/types.hpp"

namespace skg::kgraph {

inline constexpr const char* kAliasOfAttribute = "alias_of";
inline constexpr const char* kFusionTag = "fusion";

struct AliasGroup {
  EntityType etype = EntityType::Software;
  std::string canonical;             // normalized
  std::vector<std::string> members;  // normalized, sorted, includes canonical
  std::string provenance;            // "curated:<file>" or "structured:<node id>"

  bool operator==(const AliasGroup&) const = default;
};

nlohmann::json to_json(const AliasGroup& g);
AliasGroup alias_group_from_json(const nlohmann::json& j);

class AliasTable {
 public:
  /// Normalizes names and adds the canonical name to the members. Throws
  /// ConflictingGroup when a member already belongs to another group of the
  /// same etype, ValidationError for groups with no members.
  void add(AliasGroup group);

  /// Lines of the form `EntityType | canonical | member, member, ...`.
  /// Blank lines and '#' comments are skipped.
  static AliasTable load_file(const std::filesystem::path& file);

  /// Groups derived from every node's `aliases` attribute: the node's
  /// description is canonical, the attribute values are members. Groups that
  /// overlap are merged; the smallest node id supplies the canonical name.
  static AliasTable from_graph(const OntologyGraph& graph);

  /// Adds groups from `other` that do not conflict with groups already
  /// present; returns the provenance strings of skipped groups.
  std::vector<std::string> absorb(const AliasTable& other);

  const std::vector<AliasGroup>& groups() const { return groups_; }
  bool empty() const { return groups_.empty(); }

 private:
  std::vector<AliasGroup> groups_;
  std::map<std::pair<EntityType, std::string>, std::size_t> member_of_;
};

struct GroupOutcome {
  std::string canonical;
  EntityType etype = EntityType::Software;
  bool applied = false;
  std::size_t members_fused = 0;
  std::size_t edges_repointed = 0;
  std::size_t duplicates_collapsed = 0;
};

struct FusionReport {
  std::vector<GroupOutcome> groups;
  std::size_t groups_applied() const;
  std::size_t nodes_removed() const;
  nlohmann::json to_json() const;
};

/// Applies one group: with at least two matching nodes, the canonical node
/// (created if absent) absorbs each member's attributes and source ids,
/// records the member name under `alias_of`, and takes over its edges; the
/// member node is then removed.
GroupOutcome fuse_group(OntologyGraph& graph, const AliasGroup& group);
FusionReport fuse_aliases(OntologyGraph& graph, const AliasTable& table);

}  // namespace skg::kgraph
