#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "skg/core/types.hpp"
#include "skg/nlp/gazetteer.hpp"
#include "skg/nlp/tokenizer.hpp"

namespace skg::nlp {

inline constexpr const char* kOutside = "O";

std::string bio_label(char prefix, EntityType etype);

struct ParsedLabel {
  char prefix = 'O';  // 'B', 'I' or 'O'
  std::optional<EntityType> etype;
};
/// Throws ValidationError for strings outside the BIO tag set.
ParsedLabel parse_label(const std::string& label);

/// O first, then B-/I- pairs in ner_types() order. O is index 0.
const std::vector<std::string>& default_label_set();

/// Rewrites every I-X whose predecessor is neither B-X nor I-X as B-X.
std::size_t repair_bio(std::vector<std::string>& labels);
bool is_bio_consistent(const std::vector<std::string>& labels);

struct LabeledSpan {
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive
  EntityType etype = EntityType::Software;
  bool operator==(const LabeledSpan&) const = default;
};
/// Entity spans in a BIO sequence. A stray I-X opens a new span.
std::vector<LabeledSpan> bio_spans(const std::vector<std::string>& labels);

struct LabelingFunctionVote {
  std::string lf_name;
  std::size_t begin = 0;
  std::size_t end = 0;  // exclusive token range
  std::string label;    // the entity's B- label; ABSTAIN is the absence of a vote
};

/// A labeling function that votes for spans found in a curated name list.
struct LabelingFunction {
  std::string name;
  const Gazetteer* gazetteer = nullptr;
  double weight = 1.0;

  std::vector<LabelingFunctionVote> apply(const TokenSeq& ts) const;
};

/// Builds one labeling function per gazetteer. `weights` maps LF name
/// (gazetteer name) to its precision prior; missing names get 1.0.
std::vector<LabelingFunction> make_labeling_functions(const GazetteerSet& gazetteers,
                                                      const std::map<std::string, double>& weights = {});

struct TieEvent {
  std::size_t token = 0;
  std::vector<std::string> candidates;
  std::string chosen;
};

struct LabelSynthesis {
  std::vector<std::string> labels;
  std::vector<double> confidence;
  std::vector<LabelingFunctionVote> votes;
  std::vector<TieEvent> ties;
  std::size_t repairs = 0;
};

/// Weighted majority vote per token over all labeling functions. Ties go
/// to the type earlier in ner_types(), then B- before I-. Tokens nobody
/// voted on get O with confidence 1. BIO consistency is repaired last.
LabelSynthesis synthesize_labels(const TokenSeq& ts, const std::vector<LabelingFunction>& lfs);

}  // namespace skg::nlp
