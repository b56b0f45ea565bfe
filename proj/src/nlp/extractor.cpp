#include "skg/nlp/extractor.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "skg/core/text.hpp"
#include "skg/nlp/ioc.hpp"

namespace skg::nlp {

std::vector<EntityMention> extract_iocs_regex(const TokenSeq& ts) {
  std::vector<EntityMention> out;
  for (const auto& t : ts.tokens) {
    if (!t.is_ioc()) continue;
    EntityMention m;
    m.surface = t.canonical.empty() ? t.surface : t.canonical;
    m.span = t.span;
    m.etype = *t.ioc_type;
    m.confidence = 1.0;
    m.provenance = Provenance::Regex;
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<EntityMention> extract_structured_iocs(const CtiRecord& rec) {
  std::vector<EntityMention> out;
  auto it = rec.structured_fields.find("ioc_table");
  if (it == rec.structured_fields.end()) return out;
  for (const auto& raw : it->second) {
    std::string value = refang(trim(raw));
    auto etype = classify_ioc(value);
    if (!etype) continue;
    EntityMention m;
    m.surface = value;
    if (*etype == EntityType::HashMD5 || *etype == EntityType::HashSHA1 || *etype == EntityType::HashSHA256) {
      m.surface = to_lower_ascii(value);
    }
    m.field = "ioc_table";
    m.etype = *etype;
    m.confidence = 1.0;
    m.provenance = Provenance::Structured;
    out.push_back(std::move(m));
  }
  return out;
}

FeatureExtractor ExtractorResources::feature_extractor() const {
  FeatureExtractor fe(model ? model->templates : FeatureExtractor::default_templates(), &gazetteers);
  return fe;
}

namespace {

std::vector<EntityMention> text_entities(const TokenSeq& ts, std::string_view text, const ExtractorResources& res,
                                         bool use_crf) {
  auto out = extract_iocs_regex(ts);
  if (use_crf && res.model) {
    auto fe = res.feature_extractor();
    for (auto& m : crf_decode(*res.model, fe, ts, text, res.decode)) out.push_back(std::move(m));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const EntityMention& a, const EntityMention& b) { return a.span->start < b.span->start; });
  return out;
}

}  // namespace

std::vector<EntityMention> extract_text_entities(std::string_view text, const ExtractorResources& res, bool use_crf) {
  auto ts = tokenize(protect_iocs(text));
  return text_entities(ts, text, res, use_crf);
}

void extract_record(CtiRecord& rec, const ExtractorResources& res) {
  rec.entities = extract_structured_iocs(rec);
  std::size_t structured = rec.entities.size();
  auto ts = tokenize(protect_iocs(rec.body_text));
  auto mentions = text_entities(ts, rec.body_text, res, true);
  std::size_t regex = 0;
  for (const auto& m : mentions) regex += m.provenance == Provenance::Regex ? 1 : 0;
  for (auto& m : mentions) rec.entities.push_back(std::move(m));
  rec.relations = extract_relations(ts, rec.entities, res.lexicon);
  rec.log("extractor", fmt::format("{} structured, {} regex, {} crf entities; {} relations", structured, regex,
                                   rec.entities.size() - structured - regex, rec.relations.size()));
}

}  // namespace skg::nlp
