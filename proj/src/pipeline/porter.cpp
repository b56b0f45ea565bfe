#include <algorithm>
#include <map>
#include <tuple>

#include "skg/core/error.hpp"
#include "skg/core/text.hpp"
#include "skg/pipeline/components.hpp"

namespace skg::pipeline {

std::string make_report_id(const std::string& source_id, const std::string& origin_locator,
                           const std::string& content_hash) {
  return "r" + sha256_hex(source_id + '\x1f' + origin_locator + '\x1f' + content_hash).substr(0, 16);
}

namespace {

/// Groups pages sharing (source_id, report_key) into one ReportDoc, pages
/// ordered by page index then locator. Empty pages are UnreadablePayload.
class GroupingPorter final : public Porter {
 public:
  std::vector<ReportDoc> port(std::vector<ingest::FetchedItem> items, std::vector<ItemError>& errors) override {
    std::map<std::pair<std::string, std::string>, std::vector<ingest::FetchedItem>> groups;
    std::vector<std::pair<std::string, std::string>> order;
    for (auto& it : items) {
      auto key = std::make_pair(it.source_id, it.report_key);
      auto [g, fresh] = groups.try_emplace(key);
      if (fresh) order.push_back(key);
      g->second.push_back(std::move(it));
    }
    std::vector<ReportDoc> out;
    for (const auto& key : order) {
      auto& pages = groups[key];
      std::stable_sort(pages.begin(), pages.end(), [](const auto& a, const auto& b) {
        return std::tie(a.page_index, a.origin_locator) < std::tie(b.page_index, b.origin_locator);
      });
      ReportDoc doc;
      doc.source_id = key.first;
      std::string hash_input;
      for (auto& p : pages) {
        if (p.bytes.empty()) {
          errors.push_back({p.origin_locator, StageKind::Porter, "UnreadablePayload", "zero-byte payload"});
          continue;
        }
        if (doc.raw_payloads.empty()) {
          doc.origin_locator = p.origin_locator;
          doc.title = p.title_hint;
        }
        doc.fetched_at = std::max(doc.fetched_at, p.fetched_at);
        hash_input += sha256_hex(p.bytes);
        doc.raw_payloads.push_back({p.content_type, std::move(p.bytes)});
      }
      if (doc.raw_payloads.empty()) continue;
      doc.content_hash = sha256_hex(hash_input);
      doc.report_id = make_report_id(doc.source_id, doc.origin_locator, doc.content_hash);
      out.push_back(std::move(doc));
    }
    return out;
  }
};

}  // namespace

std::unique_ptr<Component> make_grouping_porter() { return std::make_unique<GroupingPorter>(); }

}  // namespace skg::pipeline
