#include "skg/core/types.hpp"

#include <array>
#include <chrono>
#include <ctime>

#include <fmt/format.h>

#include "skg/core/error.hpp"

namespace skg {

namespace {

constexpr std::array<std::string_view, kEntityTypeCount> kEntityTypeNames = {
    "ReportMalware", "ReportVulnerability", "ReportAttack", "Vendor",   "ThreatActor",
    "Technique",     "Tool",                "Software",     "FileName", "FilePath",
    "IP",            "URL",                 "Email",        "Domain",   "Registry",
    "HashMD5",       "HashSHA1",            "HashSHA256",
};

constexpr std::array<std::string_view, 23> kErrorNames = {
    "MalformedEncoding", "TypeMismatch",     "EmptyDescription", "DuplicateName",
    "UnknownComponent",  "BuildError",       "UnreadablePayload", "SourceUnavailable",
    "WindowTooShort",    "TemplateMismatch", "GazetteerMissing", "DegenerateCorpus",
    "NonfiniteLoss",     "ValidationError",  "ConflictingGroup", "CorruptLog",
    "VersionMismatch",   "SyntaxError",      "UnboundVariable",  "NotFound",
    "EmptyGraph",        "BadRequest",       "IoError",
};

}  // namespace

std::string_view to_string(ErrorCode code) {
  return kErrorNames[static_cast<std::size_t>(code)];
}

Error::Error(ErrorCode code, const std::string& message, std::optional<std::size_t> offset)
    : std::runtime_error(offset ? fmt::format("{}: {} (at offset {})", to_string(code), message,
                                              *offset)
                                : fmt::format("{}: {}", to_string(code), message)),
      code_(code),
      offset_(offset) {}

std::string_view to_string(EntityType type) {
  return kEntityTypeNames[static_cast<std::size_t>(type)];
}

std::optional<EntityType> entity_type_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kEntityTypeNames.size(); ++i) {
    if (kEntityTypeNames[i] == name) return static_cast<EntityType>(i);
  }
  return std::nullopt;
}

bool is_ioc_type(EntityType type) {
  return static_cast<std::uint8_t>(type) >= static_cast<std::uint8_t>(EntityType::FileName);
}

bool is_case_sensitive(EntityType type) {
  return type == EntityType::FilePath || type == EntityType::Registry;
}

std::string_view to_string(ReportKind kind) {
  switch (kind) {
    case ReportKind::Malware: return "Malware";
    case ReportKind::Vulnerability: return "Vulnerability";
    case ReportKind::Attack: return "Attack";
  }
  return "Attack";
}

std::optional<ReportKind> report_kind_from_string(std::string_view name) {
  if (name == "Malware") return ReportKind::Malware;
  if (name == "Vulnerability") return ReportKind::Vulnerability;
  if (name == "Attack") return ReportKind::Attack;
  return std::nullopt;
}

EntityType report_entity_type(ReportKind kind) {
  switch (kind) {
    case ReportKind::Malware: return EntityType::ReportMalware;
    case ReportKind::Vulnerability: return EntityType::ReportVulnerability;
    case ReportKind::Attack: return EntityType::ReportAttack;
  }
  return EntityType::ReportAttack;
}

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Structured: return "Structured";
    case Provenance::Regex: return "Regex";
    case Provenance::Crf: return "Crf";
  }
  return "Regex";
}

std::optional<Provenance> provenance_from_string(std::string_view name) {
  if (name == "Structured") return Provenance::Structured;
  if (name == "Regex") return Provenance::Regex;
  if (name == "Crf") return Provenance::Crf;
  return std::nullopt;
}

Timestamp now_utc() {
  using namespace std::chrono;
  return Timestamp{duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count()};
}

std::string to_iso8601(Timestamp ts) {
  std::time_t secs = static_cast<std::time_t>(ts.millis / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}.{:03}Z", tm.tm_year + 1900,
                     tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                     static_cast<int>(((ts.millis % 1000) + 1000) % 1000));
}

void validate(const CtiRecord& record) {
  const std::size_t n = record.body_text.size();
  for (std::size_t i = 0; i < record.entities.size(); ++i) {
    const auto& m = record.entities[i];
    if (m.span) {
      if (m.span->end <= m.span->start || m.span->end > n) {
        throw Error(ErrorCode::ValidationError,
                    fmt::format("entity {} span [{}, {}) outside body of length {}", i,
                                m.span->start, m.span->end, n));
      }
    } else if (!m.field || !record.structured_fields.contains(*m.field)) {
      throw Error(ErrorCode::ValidationError,
                  fmt::format("entity {} has neither a span nor a known structured field", i));
    }
    if (m.confidence < 0.0 || m.confidence > 1.0) {
      throw Error(ErrorCode::ValidationError, fmt::format("entity {} confidence out of range", i));
    }
  }
  for (std::size_t i = 0; i < record.relations.size(); ++i) {
    const auto& r = record.relations[i];
    if (r.head >= record.entities.size() || r.tail >= record.entities.size() ||
        r.head == r.tail || r.verb.empty()) {
      throw Error(ErrorCode::ValidationError, fmt::format("relation {} is malformed", i));
    }
  }
}

const std::vector<std::string>& starter_field_keys() {
  static const std::vector<std::string> keys = {"aliases",  "platform", "severity",
                                                "first_seen", "ioc_table", "references"};
  return keys;
}

}  // namespace skg
