#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skg/core/types.hpp"

namespace skg::ingest {

enum class SourceKind { HttpListing, HttpFeed, LocalDir };

std::string_view to_string(SourceKind kind);
std::optional<SourceKind> source_kind_from_string(std::string_view name);

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds backoff_base{500};
};

struct SourceSpec {
  std::string source_id;
  SourceKind kind = SourceKind::LocalDir;
  std::vector<std::string> entry_locators;
  std::chrono::milliseconds period{3600000};
  int max_concurrency = 1;
  double rate_limit = 1.0;  // requests per second
  RetryPolicy retry;
  /// HttpListing: CSS selectors picking report links on the listing page.
  std::vector<std::string> link_selectors{"a[href]"};
};

/// Throws ValidationError naming the offending field.
void validate(const SourceSpec& spec);

/// Keys: source_id, kind, entry_locators, period_seconds, max_concurrency,
/// rate_limit, retry_max_attempts, retry_backoff_ms, link_selectors.
/// Relative LocalDir locators are resolved against `base_dir`.
SourceSpec source_spec_from_json(const nlohmann::json& j, const std::string& base_dir = "");

struct FetchedItem {
  std::string source_id;
  std::string origin_locator;
  std::string report_key;  // pages of one report share this key
  int page_index = 1;
  std::string content_type;
  std::string bytes;
  Timestamp fetched_at;
  std::string title_hint;
};

struct ReportKey {
  std::string key;
  int page = 1;
};

/// "dir/foo.page2.html" -> {"dir/foo", 2}; "dir/foo.html" -> {"dir/foo", 1}.
ReportKey report_key_from_path(std::string_view path);

/// Guess from file extension or URL path: text/html, application/pdf,
/// text/plain, application/octet-stream.
std::string content_type_for(std::string_view path);

}  // namespace skg::ingest
