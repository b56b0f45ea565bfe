#include "skg/query/engine.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <random>
#include <set>

#include "skg/core/error.hpp"
#include "skg/core/text.hpp"

namespace skg::query {

using nlohmann::json;

std::size_t Limits::clamp(std::optional<std::size_t> requested) const {
  if (!requested) return std::min(default_limit, max_limit);
  if (*requested == 0) throw Error(ErrorCode::BadRequest, "limit must be positive");
  return std::min(*requested, max_limit);
}

std::vector<NodeId> SubgraphView::ids() const {
  std::vector<NodeId> out;
  for (const auto& n : nodes) out.push_back(n.id);
  return out;
}

json SubgraphView::to_json() const {
  json jn = json::array();
  for (const auto& n : nodes) {
    jn.push_back({{"id", n.id},
                  {"etype", to_string(n.etype)},
                  {"description", n.description},
                  {"degree", n.degree},
                  {"attributes", n.attributes}});
  }
  json je = json::array();
  for (const auto& e : edges) je.push_back({{"src", e.src}, {"dst", e.dst}, {"verb", e.verb}});
  json out = {{"nodes", jn}, {"edges", je}, {"truncated", truncated}, {"limit", limit}};
  out["next_cursor"] = next_cursor ? json(*next_cursor) : json(nullptr);
  return out;
}

namespace {

std::size_t parse_cursor(std::string_view cursor) {
  if (cursor.empty()) return 0;
  std::size_t v = 0;
  for (char c : cursor) {
    if (c < '0' || c > '9' || v > 1'000'000'000) throw Error(ErrorCode::BadRequest, "invalid cursor");
    v = v * 10 + static_cast<std::size_t>(c - '0');
  }
  return v;
}

}  // namespace

QueryEngine::QueryEngine(std::shared_ptr<const OntologyGraph> graph, json runs, Limits limits)
    : graph_(std::move(graph)), index_(kgraph::SearchIndex::build(*graph_)), runs_(std::move(runs)), limits_(limits) {
  if (!runs_.is_array()) runs_ = json::array();
}

NodeSummary QueryEngine::summarize(const Node& n) const {
  NodeSummary s{n.id, n.etype, n.description, graph_->degree(n.id), {}};
  for (const auto& [key, values] : n.attributes) {
    auto& out = s.attributes[key];
    for (const auto& [v, tags] : values) out.push_back(v);
  }
  return s;
}

SubgraphView QueryEngine::view_of(const std::vector<NodeId>& ids, std::size_t limit, bool truncated) const {
  SubgraphView view;
  view.limit = limit;
  view.truncated = truncated;
  std::set<NodeId> included(ids.begin(), ids.end());
  std::set<EdgeSummary> edges;
  for (const auto& id : ids) {
    view.nodes.push_back(summarize(*graph_->find(id)));
    for (const auto& k : graph_->incident_edges(id)) {
      if (included.contains(k.src) && included.contains(k.dst)) edges.insert({k.src, k.dst, k.verb});
    }
  }
  view.edges.assign(edges.begin(), edges.end());
  return view;
}

namespace {

SubgraphView page(const std::vector<NodeId>& all, std::size_t limit, std::string_view cursor,
                  const std::function<SubgraphView(const std::vector<NodeId>&, std::size_t, bool)>& make) {
  std::size_t offset = parse_cursor(cursor);
  std::vector<NodeId> slice;
  for (std::size_t i = offset; i < all.size() && slice.size() < limit; ++i) slice.push_back(all[i]);
  bool more = offset + slice.size() < all.size();
  auto view = make(slice, limit, more);
  if (more) view.next_cursor = std::to_string(offset + slice.size());
  return view;
}

}  // namespace

SubgraphView QueryEngine::search(std::string_view q, std::optional<std::size_t> limit,
                                 std::string_view cursor) const {
  if (trim(q).empty()) throw Error(ErrorCode::BadRequest, "search query is empty");
  std::size_t lim = limits_.clamp(limit);
  struct Hit {
    std::size_t matches;
    std::size_t degree;
    NodeId id;
  };
  std::vector<Hit> hits;
  for (const auto& [id, count] : index_.match_counts(q)) hits.push_back({count, graph_->degree(id), id});
  std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    if (a.matches != b.matches) return a.matches > b.matches;
    if (a.degree != b.degree) return a.degree > b.degree;
    return a.id < b.id;
  });
  std::vector<NodeId> ordered;
  for (auto& h : hits) ordered.push_back(std::move(h.id));
  return page(ordered, lim, cursor,
              [this](const auto& ids, std::size_t l, bool t) { return view_of(ids, l, t); });
}

SubgraphView QueryEngine::execute(const QueryAst& ast, std::optional<std::size_t> limit,
                                  std::string_view cursor) const {
  std::size_t lim = limits_.clamp(limit);
  std::vector<NodeId> matched;
  for (const auto& [id, node] : graph_->nodes()) {
    bool ok = true;
    if (ast.predicate) {
      const auto& attr = ast.predicate->attribute;
      const auto& lit = ast.predicate->literal;
      if (attr == "name") {
        try {
          ok = normalize_description(lit, node.etype) == node.description;
        } catch (const Error&) {
          ok = false;
        }
      } else if (attr == "type") {
        ok = iequals(lit, to_string(node.etype));
      } else if (attr == "id") {
        ok = lit == id;
      } else {
        auto it = node.attributes.find(attr);
        ok = false;
        if (it != node.attributes.end()) {
          for (const auto& [v, tags] : it->second) ok = ok || iequals(v, lit);
        }
      }
    }
    if (ok) matched.push_back(id);
  }
  return page(matched, lim, cursor,
              [this](const auto& ids, std::size_t l, bool t) { return view_of(ids, l, t); });
}

SubgraphView QueryEngine::neighbors(const NodeId& id, std::optional<std::size_t> limit) const {
  if (!graph_->find(id)) throw Error(ErrorCode::NotFound, "no node '" + id + "'");
  std::size_t lim = limits_.clamp(limit);
  std::set<NodeId> adj;
  for (const auto& k : graph_->incident_edges(id)) adj.insert(k.src == id ? k.dst : k.src);
  adj.erase(id);
  std::vector<NodeId> ids{id};
  for (const auto& n : adj) {
    if (ids.size() > lim) break;
    ids.push_back(n);
  }
  return view_of(ids, lim, adj.size() > lim);
}

json QueryEngine::node_detail(const NodeId& id) const {
  const Node* n = graph_->find(id);
  if (!n) throw Error(ErrorCode::NotFound, "no node '" + id + "'");
  json attrs = json::object();
  for (const auto& [key, values] : n->attributes) {
    json vs = json::array();
    for (const auto& [v, tags] : values) vs.push_back({{"value", v}, {"sources", tags}});
    attrs[key] = vs;
  }
  json edges = json::array();
  for (const auto& k : graph_->incident_edges(id)) {
    edges.push_back({{"src", k.src}, {"dst", k.dst}, {"verb", k.verb}, {"source_report_id", k.source_report_id},
                     {"attributes", graph_->edges().at(k)}});
  }
  return {{"id", n->id},
          {"etype", to_string(n->etype)},
          {"description", n->description},
          {"degree", graph_->degree(id)},
          {"attributes", attrs},
          {"source_report_ids", n->source_report_ids},
          {"edges", edges}};
}

SubgraphView QueryEngine::random_subgraph(std::optional<std::size_t> size, std::uint64_t seed) const {
  if (graph_->empty()) throw Error(ErrorCode::EmptyGraph, "graph has no nodes");
  std::size_t lim = limits_.clamp(size);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, graph_->node_count() - 1);
  auto it = graph_->nodes().begin();
  std::advance(it, static_cast<std::ptrdiff_t>(pick(rng)));
  std::vector<NodeId> order;
  std::set<NodeId> seen{it->first};
  std::deque<NodeId> frontier{it->first};
  bool truncated = false;
  while (!frontier.empty()) {
    NodeId cur = frontier.front();
    frontier.pop_front();
    if (order.size() == lim) {
      truncated = true;
      break;
    }
    order.push_back(cur);
    std::set<NodeId> adj;
    for (const auto& k : graph_->incident_edges(cur)) adj.insert(k.src == cur ? k.dst : k.src);
    for (const auto& n : adj) {
      if (seen.insert(n).second) frontier.push_back(n);
    }
  }
  return view_of(order, lim, truncated);
}

json QueryEngine::stats() const {
  std::map<std::string, std::size_t> by_type;
  for (std::size_t t = 0; t < kEntityTypeCount; ++t) by_type[std::string(to_string(static_cast<EntityType>(t)))] = 0;
  for (const auto& [id, n] : graph_->nodes()) ++by_type[std::string(to_string(n.etype))];
  std::map<std::string, std::size_t> by_verb;
  for (const auto& [k, a] : graph_->edges()) ++by_verb[k.verb];
  std::size_t reports = 0;
  for (const auto& r : runs_) reports += r.value("reports_merged", std::size_t{0});
  json out = {{"nodes", graph_->node_count()},
              {"edges", graph_->edge_count()},
              {"nodes_by_type", by_type},
              {"edges_by_verb", by_verb},
              {"runs", runs_.size()},
              {"reports_ingested", reports},
              {"reports_per_minute", nullptr},
              {"last_run", nullptr}};
  if (!runs_.empty()) {
    const auto& last = runs_.back();
    out["reports_per_minute"] = last.value("reports_per_minute", 0.0);
    out["last_run"] = {{"started_at", last.value("started_at", "")},
                       {"wall_seconds", last.value("wall_seconds", 0.0)},
                       {"reports_ported", last.value("reports_ported", std::size_t{0})},
                       {"reports_merged", last.value("reports_merged", std::size_t{0})}};
  }
  return out;
}

}  // namespace skg::query
