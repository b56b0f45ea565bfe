#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>

#include "skg/core/types.hpp"

namespace skg::ingest {

struct LedgerEntry {
  std::string content_hash;
  Timestamp last_fetched_at;
  bool operator==(const LedgerEntry&) const = default;
};

/// origin_locator -> last seen content. Persisted as NDJSON, one line per
/// update; on load the last line for a locator wins. Thread-safe.
class FetchLedger {
 public:
  FetchLedger() = default;  // in-memory only
  explicit FetchLedger(std::filesystem::path file);

  /// True when the locator is unknown or its hash differs.
  bool is_new_or_changed(const std::string& locator, const std::string& content_hash) const;
  /// Records an item; timestamps never move backwards. Appends to the file
  /// when one is attached.
  void record(const std::string& locator, const std::string& content_hash, Timestamp fetched_at);

  std::optional<LedgerEntry> get(const std::string& locator) const;
  std::size_t size() const;
  std::map<std::string, LedgerEntry> entries() const;

 private:
  std::filesystem::path file_;
  mutable std::mutex mu_;
  std::map<std::string, LedgerEntry> entries_;
};

}  // namespace skg::ingest
