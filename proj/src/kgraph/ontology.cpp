#include "skg/kgraph/ontology.hpp"

#include <map>
#include <set>

#include "skg/core/error.hpp"
#include "skg/core/text.hpp"

namespace skg::kgraph {

RefactorResult refactor_to_ontology(const CtiRecord& rec) {
  validate(rec);
  RefactorResult out;
  out.report_id = rec.report_id;
  const std::string& tag = rec.report_id;

  std::map<std::pair<EntityType, std::string>, std::size_t> index;
  auto add_node = [&](EntityType etype, std::string desc) {
    auto key = std::make_pair(etype, desc);
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    out.nodes.push_back({etype, std::move(desc), {}});
    index.emplace(key, out.nodes.size() - 1);
    return out.nodes.size() - 1;
  };

  const EntityType report_type = report_entity_type(rec.report_kind);
  std::string title = trim(rec.title).empty() ? rec.report_id : rec.title;
  std::size_t report = add_node(report_type, normalize_description(title, report_type));
  auto& rattrs = out.nodes[report].attributes;
  for (const auto& [field, values] : rec.structured_fields) {
    if (field == "ioc_table") continue;
    for (const auto& v : values) {
      auto cv = collapse_whitespace(v);
      if (!cv.empty()) rattrs[field][cv].insert(tag);
    }
  }
  if (!rec.source_id.empty()) rattrs["source_id"][rec.source_id].insert(tag);

  if (rec.vendor && !trim(*rec.vendor).empty()) {
    std::size_t vendor = add_node(EntityType::Vendor, normalize_description(*rec.vendor, EntityType::Vendor));
    out.edges.push_back({report, vendor, kReportedBy, {}});
  }

  std::vector<std::size_t> entity_node(rec.entities.size());
  std::set<std::size_t> contained;
  for (std::size_t e = 0; e < rec.entities.size(); ++e) {
    const auto& m = rec.entities[e];
    if (m.span && (m.span->start > m.span->end || m.span->end > rec.body_text.size())) {
      throw Error(ErrorCode::ValidationError,
                  "entity " + std::to_string(e) + " span lies outside the body text of " + rec.report_id);
    }
    entity_node[e] = add_node(m.etype, normalize_description(m.surface, m.etype));
    std::size_t n = entity_node[e];
    if (n == report) continue;
    if (contained.insert(n).second) {
      out.edges.push_back({report, n, kContains, {}});
    }
  }

  for (const auto& r : rec.relations) {
    if (r.head >= rec.entities.size() || r.tail >= rec.entities.size()) {
      throw Error(ErrorCode::ValidationError, "relation refers to a missing entity in " + rec.report_id);
    }
    std::size_t h = entity_node[r.head];
    std::size_t t = entity_node[r.tail];
    if (h == t) continue;
    EdgeAttributes attrs;
    if (r.evidence_span.end <= rec.body_text.size() && r.evidence_span.start < r.evidence_span.end) {
      attrs["evidence"] = collapse_whitespace(
          std::string_view(rec.body_text).substr(r.evidence_span.start, r.evidence_span.length()));
    }
    out.edges.push_back({h, t, r.verb, std::move(attrs)});
  }
  return out;
}

MergeDelta merge_into_graph(OntologyGraph& graph, const RefactorResult& result) {
  MergeDelta delta;
  std::vector<NodeId> ids;
  ids.reserve(result.nodes.size());
  const std::set<std::string> sources{result.report_id};
  for (const auto& n : result.nodes) {
    const Node* before = graph.find(n.etype, n.description);
    std::optional<Node> snapshot;
    if (before) snapshot = *before;
    auto [id, created] = graph.upsert_node(n.etype, n.description, n.attributes, sources);
    ids.push_back(id);
    if (created) {
      ++delta.nodes_created;
      delta.touched.push_back(id);
    } else {
      ++delta.nodes_unified;
      if (!(*graph.find(id) == *snapshot)) delta.touched.push_back(id);
    }
  }
  for (const auto& e : result.edges) {
    if (graph.insert_edge({ids[e.src], ids[e.dst], e.verb, result.report_id}, e.attributes)) ++delta.edges_added;
  }
  return delta;
}

}  // namespace skg::kgraph
