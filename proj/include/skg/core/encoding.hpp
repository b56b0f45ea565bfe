#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include <nlohmann/json.hpp>

#include "skg/core/graph.hpp"
#include "skg/core/types.hpp"

namespace skg {

/// Leading tag of every encoded value. Values are fixed forever; new types
/// get new numbers.
enum class TypeTag : std::uint8_t {
  ReportDoc = 1,
  CtiRecord = 2,
  OntologyGraph = 3,
  CrfModel = 4,
};

std::string_view to_string(TypeTag tag);

// JSON projection. Objects are std::map-backed, so keys come out sorted.
nlohmann::json to_json(const ReportDoc& doc);
nlohmann::json to_json(const EntityMention& m);
nlohmann::json to_json(const RelationMention& r);
nlohmann::json to_json(const CtiRecord& rec);
nlohmann::json to_json(const Node& node);
nlohmann::json to_json(const OntologyGraph& graph);

ReportDoc report_doc_from_json(const nlohmann::json& j);
EntityMention entity_mention_from_json(const nlohmann::json& j);
RelationMention relation_mention_from_json(const nlohmann::json& j);
CtiRecord cti_record_from_json(const nlohmann::json& j);
Node node_from_json(const nlohmann::json& j);
OntologyGraph ontology_graph_from_json(const nlohmann::json& j);

/// Wraps a JSON body in the binary envelope:
///   "SKG" | version u8 | tag u8 | body length u32 LE | CBOR body
std::string encode_envelope(TypeTag tag, const nlohmann::json& body);
/// Inverse of encode_envelope. Throws MalformedEncoding (with byte offset)
/// or TypeMismatch.
nlohmann::json decode_envelope(std::string_view bytes, TypeTag expected);
/// Tag of an encoded value without decoding the body.
TypeTag peek_tag(std::string_view bytes);

std::string serialize(const ReportDoc& doc);
std::string serialize(const CtiRecord& rec);
std::string serialize(const OntologyGraph& graph);

template <typename T>
T deserialize(std::string_view bytes);

template <>
ReportDoc deserialize<ReportDoc>(std::string_view bytes);
template <>
CtiRecord deserialize<CtiRecord>(std::string_view bytes);
template <>
OntologyGraph deserialize<OntologyGraph>(std::string_view bytes);

using IntermediateValue = std::variant<ReportDoc, CtiRecord, OntologyGraph>;

/// Dynamic form: decodes whichever intermediate type `expected` names.
IntermediateValue deserialize(std::string_view bytes, TypeTag expected);

std::string base64_encode(std::string_view bytes);
std::string base64_decode(std::string_view text);

}  // namespace skg
