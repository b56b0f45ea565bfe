#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "skg/core/types.hpp"
#include "skg/nlp/crf.hpp"
#include "skg/nlp/features.hpp"
#include "skg/nlp/gazetteer.hpp"
#include "skg/nlp/relations.hpp"
#include "skg/nlp/tokenizer.hpp"

namespace skg::nlp {

/// One mention per restored IOC token: canonical surface, confidence 1,
/// provenance Regex.
std::vector<EntityMention> extract_iocs_regex(const TokenSeq& ts);

/// IOC mentions from the `ioc_table` structured field. Values that no IOC
/// grammar accepts are skipped.
std::vector<EntityMention> extract_structured_iocs(const CtiRecord& rec);

/// Shared, read-only state for entity and relation extraction.
struct ExtractorResources {
  GazetteerSet gazetteers;
  std::shared_ptr<const CrfModel> model;  // null disables the CRF arm
  VerbLexicon lexicon = VerbLexicon::builtin();
  DecodeOptions decode;

  /// Feature extractor configured with the model's templates and our gazetteers.
  FeatureExtractor feature_extractor() const;
};

/// Text-only extraction: protect, tokenize, regex IOCs, CRF. Mentions are
/// sorted by span start.
std::vector<EntityMention> extract_text_entities(std::string_view text, const ExtractorResources& res,
                                                 bool use_crf = true);

/// Fills `rec.entities` and `rec.relations` from structured fields and body
/// text. Existing entities and relations are replaced.
void extract_record(CtiRecord& rec, const ExtractorResources& res);

}  // namespace skg::nlp
