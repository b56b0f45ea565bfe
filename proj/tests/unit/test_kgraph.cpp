#include <doctest.h>

#include <sstream>

#include "graph_gen.hpp"
#include "skg/core/error.hpp"
#include "skg/kgraph/export.hpp"
#include "skg/kgraph/fusion.hpp"
#include "skg/kgraph/ontology.hpp"
#include "skg/kgraph/search_index.hpp"
#include "support.hpp"

using namespace skg;
using namespace skg::kgraph;

namespace {

EntityMention span_mention(const std::string& body, const std::string& surface, EntityType t) {
  auto pos = body.find(surface);
  return {surface, CharSpan{pos, pos + surface.size()}, std::nullopt, t, 1.0, Provenance::Crf};
}

std::size_t count_verb(const RefactorResult& r, const std::string& verb) {
  std::size_t n = 0;
  for (const auto& e : r.edges) n += e.verb == verb ? 1 : 0;
  return n;
}

CtiRecord dropper_record() {
  CtiRecord rec;
  rec.report_id = "r1";
  rec.source_id = "enc";
  rec.title = "WannaCry";
  rec.report_kind = ReportKind::Malware;
  rec.body_text = "WannaCry drops tasksche.exe and mssecsvc.exe.";
  rec.entities.push_back(span_mention(rec.body_text, "WannaCry", EntityType::ReportMalware));
  rec.entities.push_back(span_mention(rec.body_text, "tasksche.exe", EntityType::FileName));
  rec.entities.push_back(span_mention(rec.body_text, "mssecsvc.exe", EntityType::FileName));
  rec.relations.push_back({0, 1, "DROP", {0, 45}, 1.0});
  return rec;
}

NodeId id_of(EntityType t, const std::string& d) { return make_node_id(t, d); }

}  // namespace

TEST_CASE("malware title, two files and a drop relation") {
  auto rec = dropper_record();
  auto r = refactor_to_ontology(rec);
  CHECK(r.nodes.size() == 3);
  CHECK(r.nodes[0].etype == EntityType::ReportMalware);
  CHECK(r.nodes[0].description == "wannacry");
  CHECK(count_verb(r, kContains) == 2);
  CHECK(count_verb(r, "DROP") == 1);
  CHECK(r.edges.size() == 3);
  for (const auto& e : r.edges) {
    if (e.verb != "DROP") continue;
    CHECK(r.nodes[e.src].etype == EntityType::ReportMalware);
    CHECK(r.nodes[e.dst].etype == EntityType::FileName);
    CHECK(e.attributes.at("evidence") == rec.body_text);
  }
}

TEST_CASE("vendor, attributes and zero-entity records") {
  CtiRecord rec;
  rec.report_id = "r9";
  rec.source_id = "vdb";
  rec.title = "CVE-2017-0144";
  rec.report_kind = ReportKind::Vulnerability;
  rec.structured_fields["severity"] = {"Critical"};
  rec.structured_fields["ioc_table"] = {"1.2.3.4"};
  auto bare = refactor_to_ontology(rec);
  REQUIRE(bare.nodes.size() == 1);
  CHECK(bare.edges.empty());
  CHECK(bare.nodes[0].etype == EntityType::ReportVulnerability);
  const auto& attrs = bare.nodes[0].attributes;
  CHECK(attrs.at("severity").at("Critical") == std::set<std::string>{"r9"});
  CHECK(attrs.at("source_id").count("vdb") == 1);
  CHECK(attrs.count("ioc_table") == 0);

  rec.vendor = "Fixture VulnDB";
  auto with_vendor = refactor_to_ontology(rec);
  REQUIRE(with_vendor.nodes.size() == 2);
  CHECK(with_vendor.nodes[1].etype == EntityType::Vendor);
  CHECK(with_vendor.nodes[1].description == "fixture vulndb");
  REQUIRE(with_vendor.edges.size() == 1);
  CHECK(with_vendor.edges[0].verb == kReportedBy);
}

TEST_CASE("repeated mentions collapse to one node and one CONTAINS edge") {
  CtiRecord rec;
  rec.report_id = "r";
  rec.title = "Campaign";
  rec.body_text = "APT29 and apt29 again.";
  rec.entities.push_back(span_mention(rec.body_text, "APT29", EntityType::ThreatActor));
  rec.entities.push_back(span_mention(rec.body_text, "apt29", EntityType::ThreatActor));
  auto r = refactor_to_ontology(rec);
  CHECK(r.nodes.size() == 2);
  CHECK(count_verb(r, kContains) == 1);
}

TEST_CASE("out-of-range spans are rejected") {
  auto rec = dropper_record();
  rec.entities[1].span = CharSpan{40, 99};
  CHECK_THROWS_AS(refactor_to_ontology(rec), Error);
}

TEST_CASE("merge unifies on normalized description and is idempotent") {
  OntologyGraph g;
  auto first = merge_into_graph(g, refactor_to_ontology(dropper_record()));
  CHECK(first.nodes_created == 3);
  CHECK(first.edges_added == 3);
  auto again = merge_into_graph(g, refactor_to_ontology(dropper_record()));
  CHECK(again.nodes_created == 0);
  CHECK(again.edges_added == 0);
  CHECK(again.touched.empty());

  auto other = dropper_record();
  other.report_id = "r2";
  other.title = "wannacry";
  auto second = merge_into_graph(g, refactor_to_ontology(other));
  CHECK(second.nodes_created == 0);
  CHECK(second.nodes_unified == 3);
  CHECK(second.edges_added == 3);
  CHECK(g.find(EntityType::ReportMalware, "wannacry")->source_report_ids == std::set<std::string>{"r1", "r2"});
  CHECK(g.node_count() == 3);
  CHECK(g.edge_count() == 6);
}

TEST_CASE("fusion on a five-node graph") {
  OntologyGraph g;
  auto A = g.upsert_node(EntityType::ReportAttack, "a", {}, {"rA"}).first;
  auto B = g.upsert_node(EntityType::ReportAttack, "b", {}, {"rB"}).first;
  auto wcry = g.upsert_node(EntityType::ReportMalware, "wcry", {{"platform", {{"windows", {"rA"}}}}}, {"rA"}).first;
  auto wcrypt = g.upsert_node(EntityType::ReportMalware, "wannacrypt", {{"platform", {{"win7", {"rB"}}}}}, {"rB"}).first;
  auto exe = g.upsert_node(EntityType::FileName, "x.exe", {}, {"rA"}).first;
  g.insert_edge({A, wcry, "CONTAINS", "rA"});
  g.insert_edge({B, wcrypt, "CONTAINS", "rB"});
  g.insert_edge({wcry, exe, "DROP", "rA"});
  g.insert_edge({wcrypt, exe, "DROP", "rA"});
  g.insert_edge({A, exe, "CONTAINS", "rA"});

  AliasTable table;
  table.add({EntityType::ReportMalware, "WannaCry", {"WCry", "WannaCrypt"}, "curated:test"});
  auto report = fuse_aliases(g, table);
  REQUIRE(report.groups.size() == 1);
  const auto& o = report.groups[0];
  CHECK(o.applied);
  CHECK(o.members_fused == 2);
  CHECK(o.edges_repointed == 3);
  CHECK(o.duplicates_collapsed == 1);
  CHECK(report.nodes_removed() == 2);

  auto W = id_of(EntityType::ReportMalware, "wannacry");
  CHECK(g.node_count() == 4);
  CHECK(g.edge_count() == 4);
  CHECK(g.edges().count({A, W, "CONTAINS", "rA"}) == 1);
  CHECK(g.edges().count({B, W, "CONTAINS", "rB"}) == 1);
  CHECK(g.edges().count({W, exe, "DROP", "rA"}) == 1);
  const Node* w = g.find(W);
  REQUIRE(w);
  CHECK(w->attributes.at("platform").size() == 2);
  CHECK(w->attributes.at(kAliasOfAttribute).size() == 2);
  CHECK(w->source_report_ids == std::set<std::string>{"rA", "rB"});

  auto before = g;
  auto second = fuse_aliases(g, table);
  CHECK_FALSE(second.groups[0].applied);
  CHECK(g == before);
}

TEST_CASE("fusion reuses an existing canonical node and skips single matches") {
  OntologyGraph g;
  auto canon = g.upsert_node(EntityType::ThreatActor, "apt29", {}, {"r1"}).first;
  auto member = g.upsert_node(EntityType::ThreatActor, "cozy bear", {}, {"r2"}).first;
  auto lone = g.upsert_node(EntityType::Tool, "cobalt strike", {}, {"r3"}).first;
  auto tech = g.upsert_node(EntityType::Technique, "spearphishing", {}, {"r2"}).first;
  g.insert_edge({member, tech, "USE", "r2"});
  AliasTable table;
  table.add({EntityType::ThreatActor, "APT29", {"Cozy Bear"}, "curated:t"});
  table.add({EntityType::Tool, "Cobalt Strike", {"CobaltStrike"}, "curated:t"});
  auto report = fuse_aliases(g, table);
  CHECK(report.groups_applied() == 1);
  CHECK(g.find(member) == nullptr);
  CHECK(g.find(lone) != nullptr);
  CHECK(g.edges().count({canon, tech, "USE", "r2"}) == 1);
}

TEST_CASE("alias table rejects conflicts") {
  AliasTable t;
  t.add({EntityType::ThreatActor, "APT28", {"Fancy Bear"}, "curated:a"});
  try {
    t.add({EntityType::ThreatActor, "Sofacy", {"fancy bear"}, "curated:b"});
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConflictingGroup);
  }
  CHECK_NOTHROW(t.add({EntityType::Tool, "Fancy Bear", {}, "curated:c"}));
  CHECK(t.groups()[0].members == std::vector<std::string>{"apt28", "fancy bear"});

  AliasTable other;
  other.add({EntityType::ThreatActor, "Fancy", {"fancy bear"}, "structured:n1"});
  other.add({EntityType::ThreatActor, "Turla", {"Snake"}, "structured:n2"});
  auto skipped = t.absorb(other);
  CHECK(skipped == std::vector<std::string>{"structured:n1"});
  CHECK(t.groups().size() == 3);
}

TEST_CASE("alias file and graph-derived groups") {
  test::TempDir dir;
  test::write_file(dir / "a.txt", "# c\nThreatActor | APT29 | CozyDuke, Cozy Bear\n\nTool | Cobalt Strike | CobaltStrike\n");
  auto t = AliasTable::load_file(dir / "a.txt");
  REQUIRE(t.groups().size() == 2);
  CHECK(t.groups()[0].members == std::vector<std::string>{"apt29", "cozy bear", "cozyduke"});
  CHECK(t.groups()[0].provenance.rfind("curated:", 0) == 0);

  OntologyGraph g;
  g.upsert_node(EntityType::ReportMalware, "wannacry", {{"aliases", {{"WCry", {"r"}}}}}, {"r"});
  auto derived = AliasTable::from_graph(g);
  REQUIRE(derived.groups().size() == 1);
  CHECK(derived.groups()[0].canonical == "wannacry");
  CHECK(derived.groups()[0].members == std::vector<std::string>{"wannacry", "wcry"});

  test::write_file(dir / "bad.txt", "Nonsense | x | y\n");
  CHECK_THROWS_AS(AliasTable::load_file(dir / "bad.txt"), Error);
}

TEST_CASE("search index terms and incremental maintenance") {
  CHECK(index_terms("Fancy  Bear") == std::set<std::string>{"fancy bear", "fancy", "bear"});
  OntologyGraph g;
  merge_into_graph(g, refactor_to_ontology(dropper_record()));
  auto idx = SearchIndex::build(g);
  auto w = id_of(EntityType::ReportMalware, "wannacry");
  CHECK(idx.lookup("WannaCry") == std::set<NodeId>{w});
  CHECK(idx.lookup("absent").empty());
  CHECK(idx.lookup("tasksche").size() == 1);

  auto inc = idx;
  auto other = dropper_record();
  other.report_id = "r2";
  other.title = "NotPetya";
  other.body_text = "NotPetya drops perfc.dat here.";
  other.entities = {span_mention(other.body_text, "NotPetya", EntityType::ReportMalware),
                    span_mention(other.body_text, "perfc.dat", EntityType::FileName)};
  other.relations.clear();
  auto delta = merge_into_graph(g, refactor_to_ontology(other));
  inc.update(g, delta.touched);
  CHECK(inc == SearchIndex::build(g));

  auto counts = inc.match_counts("wannacry perfc");
  CHECK(counts.at(w) == 1);
  CHECK(counts.size() == 2);
}

TEST_CASE("index rebuild equals incremental maintenance on random graphs") {
  auto g = test::random_graph(200, 9);
  SearchIndex inc;
  for (const auto& [id, n] : g.nodes()) inc.add_node(n);
  CHECK(inc == SearchIndex::build(g));
  auto victim = g.nodes().begin()->first;
  g.remove_node(victim);
  inc.update(g, {victim});
  CHECK(inc == SearchIndex::build(g));
}

TEST_CASE("ndjson export lists nodes then triples") {
  OntologyGraph g;
  merge_into_graph(g, refactor_to_ontology(dropper_record()));
  std::ostringstream out;
  CHECK(export_ndjson(g, out) == 6);
  std::istringstream in(out.str());
  std::string line;
  std::vector<nlohmann::json> rows;
  while (std::getline(in, line)) rows.push_back(nlohmann::json::parse(line));
  REQUIRE(rows.size() == 6);
  CHECK(rows[0]["kind"] == "node");
  CHECK(rows[2]["kind"] == "node");
  CHECK(rows[3]["kind"] == "triple");
  CHECK(rows[3].contains("subject"));
  CHECK(rows[3].contains("predicate"));
  CHECK(rows[3].contains("object"));
}
