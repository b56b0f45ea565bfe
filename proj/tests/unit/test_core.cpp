#include <doctest.h>

#include "skg/core/encoding.hpp"
#include "skg/core/error.hpp"
#include "skg/core/graph.hpp"
#include "skg/core/text.hpp"
#include "skg/core/types.hpp"

using namespace skg;

TEST_CASE("entity type names round-trip") {
  for (std::size_t i = 0; i < kEntityTypeCount; ++i) {
    auto t = static_cast<EntityType>(i);
    CHECK(entity_type_from_string(to_string(t)) == t);
  }
  CHECK_FALSE(entity_type_from_string("Malware").has_value());
  CHECK(to_string(EntityType::HashSHA256) == "HashSHA256");
}

TEST_CASE("IOC types are the observable artifacts") {
  CHECK(is_ioc_type(EntityType::IP));
  CHECK(is_ioc_type(EntityType::Registry));
  CHECK(is_ioc_type(EntityType::FileName));
  CHECK_FALSE(is_ioc_type(EntityType::ThreatActor));
  CHECK_FALSE(is_ioc_type(EntityType::Vendor));
}

TEST_CASE("report kinds map to report entity types") {
  CHECK(report_entity_type(ReportKind::Malware) == EntityType::ReportMalware);
  CHECK(report_entity_type(ReportKind::Vulnerability) == EntityType::ReportVulnerability);
  CHECK(report_entity_type(ReportKind::Attack) == EntityType::ReportAttack);
}

TEST_CASE("normalize_description collapses whitespace and folds case") {
  CHECK(normalize_description("  Fancy \t Bear\n", EntityType::ThreatActor) == "fancy bear");
  CHECK(normalize_description("C:\\Windows\\Perfc.dat", EntityType::FilePath) == "C:\\Windows\\Perfc.dat");
  CHECK(normalize_description("HKCU\\Software\\Run", EntityType::Registry) == "HKCU\\Software\\Run");
  CHECK_THROWS_AS(normalize_description(" \t ", EntityType::Tool), Error);
  try {
    normalize_description("", EntityType::Tool);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyDescription);
  }
}

TEST_CASE("digests match published test vectors") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(crc32("123456789") == 0xCBF43926u);
}

TEST_CASE("text helpers") {
  CHECK(split("a,b,,c", ',') == std::vector<std::string>{"a", "b", "", "c"});
  CHECK(iequals("CozyDuke", "cozyduke"));
  CHECK(starts_with_icase("HxxP://x", "hxxp"));
  CHECK(trim("  x y ") == "x y");
  CHECK(to_upper_ascii("use") == "USE");
}

TEST_CASE("error carries code and offset") {
  Error e(ErrorCode::CorruptLog, "bad crc", 42);
  CHECK(e.code() == ErrorCode::CorruptLog);
  REQUIRE(e.offset().has_value());
  CHECK(*e.offset() == 42);
  CHECK(std::string(e.what()).find("CorruptLog") != std::string::npos);
}

TEST_CASE("graph node identity is type plus normalized description") {
  OntologyGraph g;
  auto [a, created_a] = g.upsert_node(EntityType::Tool, "mimikatz", {{"k", {{"v", {"r1"}}}}}, {"r1"});
  auto [b, created_b] = g.upsert_node(EntityType::Tool, "mimikatz", {{"k", {{"w", {"r2"}}}}}, {"r2"});
  auto [c, created_c] = g.upsert_node(EntityType::Software, "mimikatz", {}, {"r3"});
  CHECK(created_a);
  CHECK_FALSE(created_b);
  CHECK(created_c);
  CHECK(a == b);
  CHECK(a != c);
  CHECK(a == make_node_id(EntityType::Tool, "mimikatz"));
  const Node* n = g.find(a);
  REQUIRE(n);
  CHECK(n->attributes.at("k").size() == 2);
  CHECK(n->source_report_ids == std::set<std::string>{"r1", "r2"});
}

TEST_CASE("edges dedupe on key and removal drops incident edges") {
  OntologyGraph g;
  auto a = g.upsert_node(EntityType::ThreatActor, "apt41", {}, {"r"}).first;
  auto b = g.upsert_node(EntityType::Tool, "mimikatz", {}, {"r"}).first;
  CHECK(g.insert_edge({a, b, "USE", "r"}, {{"evidence", "x"}}));
  CHECK_FALSE(g.insert_edge({a, b, "USE", "r"}, {{"evidence", "y"}}));
  CHECK(g.insert_edge({a, b, "USE", "r2"}));
  CHECK(g.edges().at({a, b, "USE", "r"}).at("evidence") == "x");
  CHECK(g.degree(a) == 2);
  CHECK_THROWS_AS(g.insert_edge({a, "nmissing", "USE", "r"}), Error);
  g.remove_node(b);
  CHECK(g.edge_count() == 0);
  CHECK(g.degree(a) == 0);
  CHECK(g.find(EntityType::Tool, "mimikatz") == nullptr);
}

TEST_CASE("record validation rejects out-of-range relations") {
  CtiRecord rec;
  rec.report_id = "r";
  rec.body_text = "APT41 used Mimikatz.";
  rec.entities.push_back({"APT41", CharSpan{0, 5}, std::nullopt, EntityType::ThreatActor, 1.0, Provenance::Crf});
  rec.relations.push_back({0, 3, "USE", {0, 5}, 1.0});
  CHECK_THROWS_AS(validate(rec), Error);
}
