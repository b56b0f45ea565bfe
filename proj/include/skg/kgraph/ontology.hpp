#pragma once

#include <string>
#include <vector>

#include "skg/core/graph.hpp"
#include "skg/core/types.hpp"

namespace skg::kgraph {

inline constexpr const char* kReportedBy = "REPORTED_BY";
inline constexpr const char* kContains = "CONTAINS";

struct NodeSpec {
  EntityType etype = EntityType::Software;
  std::string description;  // normalized
  NodeAttributes attributes;

  bool operator==(const NodeSpec&) const = default;
};

struct EdgeSpec {
  std::size_t src = 0;  // index into RefactorResult::nodes
  std::size_t dst = 0;
  std::string verb;
  EdgeAttributes attributes;

  bool operator==(const EdgeSpec&) const = default;
};

struct RefactorResult {
  std::string report_id;
  std::vector<NodeSpec> nodes;  // nodes[0] is the report node
  std::vector<EdgeSpec> edges;
};

/// Maps a record onto the ontology:
///  - report node typed by report_kind, described by the normalized title;
///    its attributes are the structured fields (except ioc_table) plus
///    source_id, each value tagged with the report id;
///  - Vendor node and report -REPORTED_BY-> vendor when a vendor is set;
///  - one node per distinct (etype, normalized surface) among entities, with
///    report -CONTAINS-> node unless that node is the report node itself;
///  - one edge per relation, labeled with its verb, carrying the evidence text.
/// Throws ValidationError for out-of-range spans or relation indices.
RefactorResult refactor_to_ontology(const CtiRecord& rec);

struct MergeDelta {
  std::size_t nodes_created = 0;
  std::size_t nodes_unified = 0;
  std::size_t edges_added = 0;
  std::vector<NodeId> touched;  // ids of nodes created or changed

  bool operator==(const MergeDelta&) const = default;
};

/// Exact-description merge: nodes unify on (etype, normalized description),
/// attributes and source ids are unioned, edges dedupe on
/// (src, dst, verb, source_report_id).
MergeDelta merge_into_graph(OntologyGraph& graph, const RefactorResult& result);

}  // namespace skg::kgraph
