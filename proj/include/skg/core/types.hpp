#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace skg {

/// Closed vocabulary of ontology node types.
enum class EntityType : std::uint8_t {
  ReportMalware,
  ReportVulnerability,
  ReportAttack,
  Vendor,
  ThreatActor,
  Technique,
  Tool,
  Software,
  FileName,
  FilePath,
  IP,
  URL,
  Email,
  Domain,
  Registry,
  HashMD5,
  HashSHA1,
  HashSHA256,
};

inline constexpr std::size_t kEntityTypeCount = 18;

std::string_view to_string(EntityType type);
std::optional<EntityType> entity_type_from_string(std::string_view name);
bool is_ioc_type(EntityType type);
/// Types whose surface text is case-sensitive on the host (paths, registry keys).
bool is_case_sensitive(EntityType type);

enum class ReportKind : std::uint8_t { Malware, Vulnerability, Attack };

std::string_view to_string(ReportKind kind);
std::optional<ReportKind> report_kind_from_string(std::string_view name);
EntityType report_entity_type(ReportKind kind);

enum class Provenance : std::uint8_t { Structured, Regex, Crf };

std::string_view to_string(Provenance p);
std::optional<Provenance> provenance_from_string(std::string_view name);

/// Milliseconds since the Unix epoch, UTC.
struct Timestamp {
  std::int64_t millis = 0;
  auto operator<=>(const Timestamp&) const = default;
};

Timestamp now_utc();
std::string to_iso8601(Timestamp ts);

struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - start; }
  auto operator<=>(const CharSpan&) const = default;
};

struct Payload {
  std::string content_type;
  std::string bytes;
  auto operator<=>(const Payload&) const = default;
};

/// One collected report plus provenance metadata, before parsing.
struct ReportDoc {
  std::string report_id;
  std::string source_id;
  std::string title;
  std::vector<Payload> raw_payloads;
  Timestamp fetched_at;
  std::string origin_locator;
  std::string content_hash;

  bool operator==(const ReportDoc&) const = default;
};

/// A recognized entity. For IOC types `surface` is the refanged canonical
/// form; the raw text is always `body_text[span]`. Mentions taken from
/// structured fields carry `field` instead of `span`.
struct EntityMention {
  std::string surface;
  std::optional<CharSpan> span;
  std::optional<std::string> field;
  EntityType etype = EntityType::Software;
  double confidence = 1.0;
  Provenance provenance = Provenance::Regex;

  bool operator==(const EntityMention&) const = default;
};

struct RelationMention {
  std::size_t head = 0;
  std::size_t tail = 0;
  std::string verb;
  CharSpan evidence_span;
  double confidence = 1.0;

  bool operator==(const RelationMention&) const = default;
};

struct LogEntry {
  std::string stage;
  std::string note;
  bool operator==(const LogEntry&) const = default;
};

/// Wide, source-independent schema of every extractable field.
struct CtiRecord {
  std::string report_id;
  std::string source_id;
  std::string title;
  ReportKind report_kind = ReportKind::Attack;
  std::optional<std::string> vendor;
  std::map<std::string, std::vector<std::string>> structured_fields;
  std::string body_text;
  std::vector<EntityMention> entities;
  std::vector<RelationMention> relations;
  std::vector<LogEntry> extraction_log;

  bool operator==(const CtiRecord&) const = default;

  void log(std::string stage, std::string note) {
    extraction_log.push_back({std::move(stage), std::move(note)});
  }
};

/// Throws ValidationError when a mention or relation breaks the record invariants.
void validate(const CtiRecord& record);

/// Documented starter key set for structured_fields. Templates may declare more.
const std::vector<std::string>& starter_field_keys();

}  // namespace skg
