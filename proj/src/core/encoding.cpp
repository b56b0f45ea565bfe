#include "skg/core/encoding.hpp"

#include <array>

#include <fmt/format.h>

#include "skg/core/error.hpp"

namespace skg {

using nlohmann::json;

namespace {

constexpr std::array<char, 3> kMagic = {'S', 'K', 'G'};
constexpr std::uint8_t kEnvelopeVersion = 1;
constexpr std::size_t kHeaderSize = 3 + 1 + 1 + 4;

[[noreturn]] void malformed(const std::string& what, std::size_t offset) {
  throw Error(ErrorCode::MalformedEncoding, what, offset);
}

EntityType etype_from_json(const json& j) {
  auto t = entity_type_from_string(j.get<std::string>());
  if (!t) malformed("unknown entity type '" + j.get<std::string>() + "'", 0);
  return *t;
}

json span_to_json(const CharSpan& s) { return json::array({s.start, s.end}); }

CharSpan span_from_json(const json& j) {
  return CharSpan{j.at(0).get<std::size_t>(), j.at(1).get<std::size_t>()};
}

json attributes_to_json(const NodeAttributes& attrs) {
  json out = json::object();
  for (const auto& [key, values] : attrs) {
    json vs = json::object();
    for (const auto& [value, tags] : values) vs[value] = tags;
    out[key] = std::move(vs);
  }
  return out;
}

NodeAttributes attributes_from_json(const json& j) {
  NodeAttributes attrs;
  for (const auto& [key, values] : j.items()) {
    auto& dst = attrs[key];
    for (const auto& [value, tags] : values.items()) {
      dst[value] = tags.get<std::set<std::string>>();
    }
  }
  return attrs;
}

template <typename Fn>
auto guarded(Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error&) {
    throw;
  } catch (const json::exception& e) {
    malformed(std::string("body does not match schema: ") + e.what(), kHeaderSize);
  }
}

}  // namespace

std::string_view to_string(TypeTag tag) {
  switch (tag) {
    case TypeTag::ReportDoc: return "ReportDoc";
    case TypeTag::CtiRecord: return "CtiRecord";
    case TypeTag::OntologyGraph: return "OntologyGraph";
    case TypeTag::CrfModel: return "CrfModel";
  }
  return "?";
}

json to_json(const ReportDoc& doc) {
  json payloads = json::array();
  for (const auto& p : doc.raw_payloads) {
    payloads.push_back({{"content_type", p.content_type}, {"bytes_b64", base64_encode(p.bytes)}});
  }
  return {{"report_id", doc.report_id},       {"source_id", doc.source_id},
          {"title", doc.title},               {"raw_payloads", std::move(payloads)},
          {"fetched_at", doc.fetched_at.millis}, {"origin_locator", doc.origin_locator},
          {"content_hash", doc.content_hash}};
}

ReportDoc report_doc_from_json(const json& j) {
  ReportDoc doc;
  doc.report_id = j.at("report_id").get<std::string>();
  doc.source_id = j.at("source_id").get<std::string>();
  doc.title = j.at("title").get<std::string>();
  for (const auto& p : j.at("raw_payloads")) {
    doc.raw_payloads.push_back(
        {p.at("content_type").get<std::string>(), base64_decode(p.at("bytes_b64").get<std::string>())});
  }
  doc.fetched_at.millis = j.at("fetched_at").get<std::int64_t>();
  doc.origin_locator = j.at("origin_locator").get<std::string>();
  doc.content_hash = j.at("content_hash").get<std::string>();
  return doc;
}

json to_json(const EntityMention& m) {
  json j = {{"surface", m.surface},
            {"etype", to_string(m.etype)},
            {"confidence", m.confidence},
            {"provenance", to_string(m.provenance)}};
  j["span"] = m.span ? span_to_json(*m.span) : json(nullptr);
  j["field"] = m.field ? json(*m.field) : json(nullptr);
  return j;
}

EntityMention entity_mention_from_json(const json& j) {
  EntityMention m;
  m.surface = j.at("surface").get<std::string>();
  m.etype = etype_from_json(j.at("etype"));
  m.confidence = j.at("confidence").get<double>();
  auto prov = provenance_from_string(j.at("provenance").get<std::string>());
  if (!prov) malformed("unknown provenance", 0);
  m.provenance = *prov;
  if (j.contains("span") && !j.at("span").is_null()) m.span = span_from_json(j.at("span"));
  if (j.contains("field") && !j.at("field").is_null()) m.field = j.at("field").get<std::string>();
  return m;
}

json to_json(const RelationMention& r) {
  return {{"head", r.head},
          {"tail", r.tail},
          {"verb", r.verb},
          {"evidence_span", span_to_json(r.evidence_span)},
          {"confidence", r.confidence}};
}

RelationMention relation_mention_from_json(const json& j) {
  RelationMention r;
  r.head = j.at("head").get<std::size_t>();
  r.tail = j.at("tail").get<std::size_t>();
  r.verb = j.at("verb").get<std::string>();
  r.evidence_span = span_from_json(j.at("evidence_span"));
  r.confidence = j.at("confidence").get<double>();
  return r;
}

json to_json(const CtiRecord& rec) {
  json entities = json::array();
  for (const auto& e : rec.entities) entities.push_back(to_json(e));
  json relations = json::array();
  for (const auto& r : rec.relations) relations.push_back(to_json(r));
  json log = json::array();
  for (const auto& l : rec.extraction_log) log.push_back(json::array({l.stage, l.note}));
  return {{"report_id", rec.report_id},
          {"source_id", rec.source_id},
          {"title", rec.title},
          {"report_kind", to_string(rec.report_kind)},
          {"vendor", rec.vendor ? json(*rec.vendor) : json(nullptr)},
          {"structured_fields", rec.structured_fields},
          {"body_text", rec.body_text},
          {"entities", std::move(entities)},
          {"relations", std::move(relations)},
          {"extraction_log", std::move(log)}};
}

CtiRecord cti_record_from_json(const json& j) {
  CtiRecord rec;
  rec.report_id = j.at("report_id").get<std::string>();
  rec.source_id = j.value("source_id", "");
  rec.title = j.value("title", "");
  auto kind = report_kind_from_string(j.at("report_kind").get<std::string>());
  if (!kind) malformed("unknown report kind", 0);
  rec.report_kind = *kind;
  if (j.contains("vendor") && !j.at("vendor").is_null()) rec.vendor = j.at("vendor").get<std::string>();
  rec.structured_fields =
      j.at("structured_fields").get<std::map<std::string, std::vector<std::string>>>();
  rec.body_text = j.at("body_text").get<std::string>();
  for (const auto& e : j.at("entities")) rec.entities.push_back(entity_mention_from_json(e));
  for (const auto& r : j.at("relations")) rec.relations.push_back(relation_mention_from_json(r));
  for (const auto& l : j.at("extraction_log")) {
    rec.extraction_log.push_back({l.at(0).get<std::string>(), l.at(1).get<std::string>()});
  }
  return rec;
}

json to_json(const Node& node) {
  return {{"id", node.id},
          {"etype", to_string(node.etype)},
          {"description", node.description},
          {"attributes", attributes_to_json(node.attributes)},
          {"source_report_ids", node.source_report_ids}};
}

Node node_from_json(const json& j) {
  Node n;
  n.id = j.at("id").get<std::string>();
  n.etype = etype_from_json(j.at("etype"));
  n.description = j.at("description").get<std::string>();
  n.attributes = attributes_from_json(j.at("attributes"));
  n.source_report_ids = j.at("source_report_ids").get<std::set<std::string>>();
  return n;
}

json to_json(const OntologyGraph& graph) {
  json nodes = json::array();
  for (const auto& [id, node] : graph.nodes()) nodes.push_back(to_json(node));
  json edges = json::array();
  for (const auto& [key, attrs] : graph.edges()) {
    edges.push_back({{"src", key.src},
                     {"dst", key.dst},
                     {"verb", key.verb},
                     {"source_report_id", key.source_report_id},
                     {"attributes", attrs}});
  }
  return {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
}

OntologyGraph ontology_graph_from_json(const json& j) {
  OntologyGraph g;
  for (const auto& jn : j.at("nodes")) {
    Node n = node_from_json(jn);
    auto [id, created] = g.upsert_node(n.etype, n.description, n.attributes, n.source_report_ids);
    if (!created || id != n.id) malformed("duplicate or inconsistent node '" + n.id + "'", 0);
  }
  for (const auto& je : j.at("edges")) {
    EdgeKey key{je.at("src").get<std::string>(), je.at("dst").get<std::string>(),
                je.at("verb").get<std::string>(), je.at("source_report_id").get<std::string>()};
    try {
      g.insert_edge(key, je.at("attributes").get<EdgeAttributes>());
    } catch (const Error& e) {
      malformed(e.what(), 0);
    }
  }
  return g;
}

std::string encode_envelope(TypeTag tag, const json& body) {
  std::vector<std::uint8_t> cbor = json::to_cbor(body);
  std::string out;
  out.reserve(kHeaderSize + cbor.size());
  out.append(kMagic.data(), kMagic.size());
  out.push_back(static_cast<char>(kEnvelopeVersion));
  out.push_back(static_cast<char>(tag));
  auto len = static_cast<std::uint32_t>(cbor.size());
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((len >> (8 * i)) & 0xFF));
  out.append(reinterpret_cast<const char*>(cbor.data()), cbor.size());
  return out;
}

TypeTag peek_tag(std::string_view bytes) {
  if (bytes.size() < 5) malformed("truncated header", bytes.size());
  for (std::size_t i = 0; i < kMagic.size(); ++i) {
    if (bytes[i] != kMagic[i]) malformed("bad magic", i);
  }
  if (static_cast<std::uint8_t>(bytes[3]) != kEnvelopeVersion) malformed("unsupported version", 3);
  auto raw = static_cast<std::uint8_t>(bytes[4]);
  if (raw < 1 || raw > 4) malformed(fmt::format("unknown type tag {}", raw), 4);
  return static_cast<TypeTag>(raw);
}

json decode_envelope(std::string_view bytes, TypeTag expected) {
  TypeTag tag = peek_tag(bytes);
  if (tag != expected) {
    throw Error(ErrorCode::TypeMismatch,
                fmt::format("expected {}, found {}", to_string(expected), to_string(tag)), 4);
  }
  if (bytes.size() < kHeaderSize) malformed("truncated header", bytes.size());
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) {
    len |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(bytes[5 + i])) << (8 * i);
  }
  const std::size_t available = bytes.size() - kHeaderSize;
  if (len > available) malformed(fmt::format("body needs {} bytes, {} present", len, available), bytes.size());
  if (len < available) malformed("trailing bytes after body", kHeaderSize + len);
  auto body = bytes.substr(kHeaderSize, len);
  try {
    return json::from_cbor(body.begin(), body.end());
  } catch (const json::parse_error& e) {
    malformed(std::string("bad body: ") + e.what(), kHeaderSize + (e.byte > 0 ? e.byte - 1 : 0));
  }
}

std::string serialize(const ReportDoc& doc) { return encode_envelope(TypeTag::ReportDoc, to_json(doc)); }
std::string serialize(const CtiRecord& rec) { return encode_envelope(TypeTag::CtiRecord, to_json(rec)); }
std::string serialize(const OntologyGraph& graph) {
  return encode_envelope(TypeTag::OntologyGraph, to_json(graph));
}

template <>
ReportDoc deserialize<ReportDoc>(std::string_view bytes) {
  auto j = decode_envelope(bytes, TypeTag::ReportDoc);
  return guarded([&] { return report_doc_from_json(j); });
}

template <>
CtiRecord deserialize<CtiRecord>(std::string_view bytes) {
  auto j = decode_envelope(bytes, TypeTag::CtiRecord);
  return guarded([&] { return cti_record_from_json(j); });
}

template <>
OntologyGraph deserialize<OntologyGraph>(std::string_view bytes) {
  auto j = decode_envelope(bytes, TypeTag::OntologyGraph);
  return guarded([&] { return ontology_graph_from_json(j); });
}

IntermediateValue deserialize(std::string_view bytes, TypeTag expected) {
  switch (expected) {
    case TypeTag::ReportDoc: return deserialize<ReportDoc>(bytes);
    case TypeTag::CtiRecord: return deserialize<CtiRecord>(bytes);
    case TypeTag::OntologyGraph: return deserialize<OntologyGraph>(bytes);
    case TypeTag::CrfModel: break;
  }
  throw Error(ErrorCode::TypeMismatch, "CrfModel is not an intermediate value");
}

std::string base64_encode(std::string_view bytes) {
  static constexpr char kAlphabet[] =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    std::uint32_t v = (static_cast<std::uint8_t>(bytes[i]) << 16) |
                      (static_cast<std::uint8_t>(bytes[i + 1]) << 8) |
                      static_cast<std::uint8_t>(bytes[i + 2]);
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(kAlphabet[(v >> 6) & 63]);
    out.push_back(kAlphabet[v & 63]);
  }
  if (i < bytes.size()) {
    std::uint32_t v = static_cast<std::uint8_t>(bytes[i]) << 16;
    if (i + 1 < bytes.size()) v |= static_cast<std::uint8_t>(bytes[i + 1]) << 8;
    out.push_back(kAlphabet[(v >> 18) & 63]);
    out.push_back(kAlphabet[(v >> 12) & 63]);
    out.push_back(i + 1 < bytes.size() ? kAlphabet[(v >> 6) & 63] : '=');
    out.push_back('=');
  }
  return out;
}

std::string base64_decode(std::string_view text) {
  auto value = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::string out;
  std::uint32_t acc = 0;
  int bits = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '=') break;
    int v = value(c);
    if (v < 0) malformed("invalid base64 character", i);
    acc = (acc << 6) | static_cast<std::uint32_t>(v);
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<char>((acc >> bits) & 0xFF));
    }
  }
  return out;
}

}  // namespace skg
