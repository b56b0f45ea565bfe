#include "skg/ingest/source.hpp"

#include <filesystem>
#include <regex>

#include "skg/core/error.hpp"
#include "skg/core/text.hpp"

namespace skg::ingest {

std::string_view to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::HttpListing: return "HttpListing";
    case SourceKind::HttpFeed: return "HttpFeed";
    case SourceKind::LocalDir: return "LocalDir";
  }
  return "?";
}

std::optional<SourceKind> source_kind_from_string(std::string_view name) {
  for (auto k : {SourceKind::HttpListing, SourceKind::HttpFeed, SourceKind::LocalDir}) {
    if (iequals(name, to_string(k))) return k;
  }
  return std::nullopt;
}

void validate(const SourceSpec& spec) {
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::ValidationError, "source '" + spec.source_id + "': " + what);
  };
  if (spec.source_id.empty()) fail("source_id is empty");
  if (spec.entry_locators.empty()) fail("entry_locators is empty");
  if (spec.period.count() <= 0) fail("period must be positive");
  if (spec.max_concurrency <= 0) fail("max_concurrency must be positive");
  if (!(spec.rate_limit > 0)) fail("rate_limit must be positive");
  if (spec.retry.max_attempts <= 0) fail("retry_max_attempts must be positive");
  if (spec.retry.backoff_base.count() < 0) fail("retry_backoff_ms must not be negative");
}

SourceSpec source_spec_from_json(const nlohmann::json& j, const std::string& base_dir) {
  SourceSpec s;
  try {
    s.source_id = j.at("source_id").get<std::string>();
    auto kind = j.value("kind", std::string("LocalDir"));
    auto k = source_kind_from_string(kind);
    if (!k) throw Error(ErrorCode::ValidationError, "unknown source kind '" + kind + "'");
    s.kind = *k;
    s.entry_locators = j.at("entry_locators").get<std::vector<std::string>>();
    if (s.kind == SourceKind::LocalDir && !base_dir.empty()) {
      for (auto& loc : s.entry_locators) {
        std::filesystem::path p(loc);
        if (p.is_relative()) loc = (std::filesystem::path(base_dir) / p).lexically_normal().string();
      }
    }
    s.period = std::chrono::milliseconds(
        static_cast<std::int64_t>(j.value("period_seconds", 3600.0) * 1000.0));
    s.max_concurrency = j.value("max_concurrency", 1);
    s.rate_limit = j.value("rate_limit", 1.0);
    s.retry.max_attempts = j.value("retry_max_attempts", 3);
    s.retry.backoff_base = std::chrono::milliseconds(j.value("retry_backoff_ms", 500));
    if (j.contains("link_selectors")) s.link_selectors = j.at("link_selectors").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ValidationError, std::string("invalid source spec: ") + e.what());
  }
  validate(s);
  return s;
}

ReportKey report_key_from_path(std::string_view path) {
  static const std::regex kPaged(R"(^(.*)\.page(\d+)(\.[A-Za-z0-9]+)?$)");
  std::string p(path);
  std::smatch m;
  if (std::regex_match(p, m, kPaged)) return {m[1].str(), std::stoi(m[2].str())};
  auto slash = p.find_last_of('/');
  auto dot = p.find_last_of('.');
  if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) return {p.substr(0, dot), 1};
  return {p, 1};
}

std::string content_type_for(std::string_view path) {
  std::string p = to_lower_ascii(path);
  auto q = p.find_first_of("?#");
  if (q != std::string::npos) p.erase(q);
  if (p.ends_with(".html") || p.ends_with(".htm") || p.ends_with("/")) return "text/html";
  if (p.ends_with(".pdf")) return "application/pdf";
  if (p.ends_with(".txt")) return "text/plain";
  if (p.ends_with(".xml") || p.ends_with(".rss") || p.ends_with(".atom")) return "application/xml";
  return "application/octet-stream";
}

}  // namespace skg::ingest
