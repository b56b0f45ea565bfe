#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skg/core/types.hpp"

namespace skg::nlp {

struct GoldEntity {
  CharSpan span;
  EntityType etype = EntityType::Software;
};

struct GoldSentence {
  std::string text;
  std::vector<GoldEntity> entities;
};

/// Reads `{"sentences": [{"text": ..., "entities": [{"text"|"start"/"end", "type"}]}]}`.
/// An entity given by "text" is located at its first occurrence after the
/// previous entity of the same sentence.
std::vector<GoldSentence> load_ner_gold(const std::filesystem::path& file);

struct PrfCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  double precision() const;
  double recall() const;
  double f1() const;
};

struct NerScores {
  std::map<EntityType, PrfCounts> per_type;

  /// Micro-averaged counts over `types` (all types when empty).
  PrfCounts micro(const std::vector<EntityType>& types = {}) const;
  nlohmann::json to_json() const;
};

using MentionFn = std::function<std::vector<EntityMention>(const std::string& text)>;

/// Exact-match evaluation on (span, type). Mentions without spans are ignored.
NerScores evaluate_ner(const std::vector<GoldSentence>& gold, const MentionFn& predict);

}  // namespace skg::nlp
