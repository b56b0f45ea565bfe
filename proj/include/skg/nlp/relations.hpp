#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "skg/core/types.hpp"
#include "skg/nlp/tokenizer.hpp"

namespace skg::nlp {

/// Relation verbs and their inflected forms.
class VerbLexicon {
 public:
  /// Built-in list used when no lexicon file is configured.
  static VerbLexicon builtin();
  /// One entry per line: `lemma [irregular-form ...]`; '#' starts a comment.
  /// Regular inflections (-s, -es, -ed, -d, -ing, doubled final consonant,
  /// dropped final e, y -> ies/ied) are generated automatically.
  static VerbLexicon load(const std::filesystem::path& file);

  void add(const std::string& lemma, const std::vector<std::string>& irregular = {});
  /// Lemma for an inflected form (case-insensitive), if it is a relation verb.
  std::optional<std::string> lemma_of(std::string_view word) const;
  std::size_t size() const { return lemmas_.size(); }

 private:
  std::vector<std::string> lemmas_;
  std::map<std::string, std::string> forms_;
};

/// "command-and-control" -> "COMMAND_AND_CONTROL".
std::string relation_label(std::string_view lemma);

/// For each pair of consecutive entities in one sentence, takes the relation
/// verb between them closest to the first entity. A be-form right before the
/// verb plus "by" right after it marks passive voice and swaps head and
/// tail. Entities without spans are ignored. Head/tail index into `entities`.
std::vector<RelationMention> extract_relations(const TokenSeq& ts, const std::vector<EntityMention>& entities,
                                               const VerbLexicon& lexicon);

}  // namespace skg::nlp
