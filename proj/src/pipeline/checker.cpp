#include <cctype>
#include <mutex>
#include <set>

#include "skg/core/text.hpp"
#include "skg/parsers/parser.hpp"
#include "skg/pipeline/components.hpp"

namespace skg::pipeline {

namespace {

std::string document_text(const ReportDoc& doc) {
  std::string text;
  for (const auto& p : doc.raw_payloads) {
    if (!text.empty()) text += '\n';
    text += parsers::payload_text(p);
  }
  return text;
}

std::vector<std::string> lower_words(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : text) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

class MinTextLength final : public Checker {
 public:
  explicit MinTextLength(std::size_t min_chars) : min_chars_(min_chars) {}
  std::optional<std::string> check(const ReportDoc& doc) override {
    if (document_text(doc).size() < min_chars_) return "min-text-length";
    return std::nullopt;
  }

 private:
  std::size_t min_chars_;
};

class AdKeywordDensity final : public Checker {
 public:
  AdKeywordDensity(double max_density, std::size_t min_hits, std::vector<std::string> keywords)
      : max_density_(max_density), min_hits_(min_hits), keywords_(keywords.begin(), keywords.end()) {}

  std::optional<std::string> check(const ReportDoc& doc) override {
    auto words = lower_words(document_text(doc));
    if (words.empty()) return std::nullopt;
    std::size_t hits = 0;
    for (const auto& w : words) hits += keywords_.contains(w) ? 1 : 0;
    double density = static_cast<double>(hits) / static_cast<double>(words.size());
    if (hits >= min_hits_ && density > max_density_) return "ad-keyword-density";
    return std::nullopt;
  }

 private:
  double max_density_;
  std::size_t min_hits_;
  std::set<std::string> keywords_;
};

class DuplicateContentHash final : public Checker {
 public:
  std::optional<std::string> check(const ReportDoc& doc) override {
    std::lock_guard lock(mu_);
    if (!seen_.insert(doc.content_hash).second) return "duplicate-content-hash";
    return std::nullopt;
  }
  bool sequential() const override { return true; }

 private:
  std::mutex mu_;
  std::set<std::string> seen_;
};

}  // namespace

const std::vector<std::string>& default_ad_keywords() {
  static const std::vector<std::string> kWords = {"buy",     "discount", "sale",  "offer", "coupon", "deal",
                                                  "deals",   "cheap",    "price", "prices", "shop",  "order",
                                                  "subscribe", "promo",  "bargain", "free", "shipping", "sponsored"};
  return kWords;
}

std::unique_ptr<Component> make_min_text_length(const StageDescriptor& d) {
  return std::make_unique<MinTextLength>(d.params.value("min_chars", std::size_t{200}));
}

std::unique_ptr<Component> make_ad_keyword_density(const StageDescriptor& d) {
  auto words = d.params.value("keywords", default_ad_keywords());
  return std::make_unique<AdKeywordDensity>(d.params.value("max_density", 0.04),
                                            d.params.value("min_hits", std::size_t{3}), std::move(words));
}

std::unique_ptr<Component> make_duplicate_content_hash() { return std::make_unique<DuplicateContentHash>(); }

}  // namespace skg::pipeline
