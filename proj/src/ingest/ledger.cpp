#include "skg/ingest/ledger.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "skg/core/error.hpp"
#include "skg/core/text.hpp"

namespace skg::ingest {

FetchLedger::FetchLedger(std::filesystem::path file) : file_(std::move(file)) {
  std::ifstream in(file_);
  if (!in) return;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      entries_[j.at("locator").get<std::string>()] = {j.at("content_hash").get<std::string>(),
                                                      Timestamp{j.at("last_fetched_at").get<std::int64_t>()}};
    } catch (const nlohmann::json::exception&) {
      // A torn final line from an interrupted append is skipped.
      continue;
    }
  }
}

bool FetchLedger::is_new_or_changed(const std::string& locator, const std::string& content_hash) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(locator);
  return it == entries_.end() || it->second.content_hash != content_hash;
}

void FetchLedger::record(const std::string& locator, const std::string& content_hash, Timestamp fetched_at) {
  std::lock_guard lock(mu_);
  auto& e = entries_[locator];
  e.content_hash = content_hash;
  e.last_fetched_at = std::max(e.last_fetched_at, fetched_at);
  if (file_.empty()) return;
  if (file_.has_parent_path()) std::filesystem::create_directories(file_.parent_path());
  std::ofstream out(file_, std::ios::app);
  if (!out) throw Error(ErrorCode::IoError, "cannot append to ledger " + file_.string());
  out << nlohmann::json{{"locator", locator},
                        {"content_hash", content_hash},
                        {"last_fetched_at", e.last_fetched_at.millis}}
             .dump()
      << '\n';
}

std::optional<LedgerEntry> FetchLedger::get(const std::string& locator) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(locator);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::size_t FetchLedger::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

std::map<std::string, LedgerEntry> FetchLedger::entries() const {
  std::lock_guard lock(mu_);
  return entries_;
}

}  // namespace skg::ingest
