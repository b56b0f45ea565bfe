#include <doctest.h>

#include <random>

#include "skg/core/encoding.hpp"
#include "skg/core/error.hpp"

using namespace skg;

namespace {

CtiRecord sample_record() {
  CtiRecord rec;
  rec.report_id = "r1";
  rec.source_id = "blog";
  rec.title = "Title";
  rec.report_kind = ReportKind::Malware;
  rec.vendor = "Vendor";
  rec.structured_fields["aliases"] = {"A", "B"};
  rec.body_text = "Emotet downloads TrickBot.";
  rec.entities.push_back({"Emotet", CharSpan{0, 6}, std::nullopt, EntityType::ReportMalware, 0.9, Provenance::Crf});
  rec.entities.push_back({"TrickBot", CharSpan{17, 25}, std::nullopt, EntityType::ReportMalware, 0.9, Provenance::Crf});
  rec.entities.push_back({"1.2.3.4", std::nullopt, std::string("ioc_table"), EntityType::IP, 1.0,
                          Provenance::Structured});
  rec.relations.push_back({0, 1, "DOWNLOAD", {0, 26}, 0.9});
  rec.log("parse", "ok");
  return rec;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an exception");
  return ErrorCode::IoError;
}

}  // namespace

TEST_CASE("envelope header layout") {
  auto bytes = encode_envelope(TypeTag::CtiRecord, nlohmann::json{{"a", 1}});
  REQUIRE(bytes.size() > 9);
  CHECK(bytes.substr(0, 3) == "SKG");
  CHECK(static_cast<int>(bytes[3]) == 1);
  CHECK(static_cast<int>(bytes[4]) == 2);
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[5 + i])) << (8 * i);
  CHECK(len == bytes.size() - 9);
  CHECK(peek_tag(bytes) == TypeTag::CtiRecord);
}

TEST_CASE("intermediate values round-trip") {
  auto rec = sample_record();
  CHECK(deserialize<CtiRecord>(serialize(rec)) == rec);

  ReportDoc doc;
  doc.report_id = "r";
  doc.source_id = "s";
  doc.title = "t";
  doc.raw_payloads = {{"text/html", std::string("<p>\0x\xff</p>", 10)}};
  doc.fetched_at = Timestamp{1700000000123};
  doc.origin_locator = "/tmp/x.html";
  doc.content_hash = "abc";
  CHECK(deserialize<ReportDoc>(serialize(doc)) == doc);

  OntologyGraph g;
  auto a = g.upsert_node(EntityType::ThreatActor, "apt29", {{"aliases", {{"cozy bear", {"r"}}}}}, {"r"}).first;
  auto b = g.upsert_node(EntityType::Technique, "spearphishing", {}, {"r"}).first;
  g.insert_edge({a, b, "USE", "r"}, {{"evidence", "APT29 uses spearphishing."}});
  CHECK(deserialize<OntologyGraph>(serialize(g)) == g);

  auto v = deserialize(serialize(rec), TypeTag::CtiRecord);
  CHECK(std::get<CtiRecord>(v) == rec);
}

TEST_CASE("decoding reports the failing byte offset") {
  auto bytes = serialize(sample_record());
  CHECK(code_of([&] { deserialize<ReportDoc>(bytes); }) == ErrorCode::TypeMismatch);

  auto bad_magic = bytes;
  bad_magic[1] = 'X';
  try {
    deserialize<CtiRecord>(bad_magic);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MalformedEncoding);
    CHECK(e.offset() == std::optional<std::size_t>(1));
  }

  auto truncated = bytes.substr(0, bytes.size() - 3);
  CHECK(code_of([&] { deserialize<CtiRecord>(truncated); }) == ErrorCode::MalformedEncoding);

  auto trailing = bytes + "x";
  try {
    deserialize<CtiRecord>(trailing);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MalformedEncoding);
    CHECK(e.offset() == std::optional<std::size_t>(bytes.size()));
  }

  auto bad_tag = bytes;
  bad_tag[4] = 9;
  try {
    peek_tag(bad_tag);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.offset() == std::optional<std::size_t>(4));
  }
}

TEST_CASE("random corruption never crashes the decoder") {
  auto bytes = serialize(sample_record());
  std::mt19937 rng(7);
  for (int i = 0; i < 300; ++i) {
    auto b = bytes;
    std::size_t pos = rng() % b.size();
    b[pos] = static_cast<char>(rng() & 0xFF);
    try {
      auto rec = deserialize<CtiRecord>(b);
      (void)rec;
    } catch (const Error& e) {
      CHECK((e.code() == ErrorCode::MalformedEncoding || e.code() == ErrorCode::TypeMismatch));
    }
  }
}

TEST_CASE("base64 round-trips binary") {
  std::string raw("\x00\x01\xfe\xffhello", 8);
  CHECK(base64_encode("foobar") == "Zm9vYmFy");
  CHECK(base64_decode(base64_encode(raw)) == raw);
}
