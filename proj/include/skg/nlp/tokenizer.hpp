#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skg/core/types.hpp"
#include "skg/nlp/ioc.hpp"

namespace skg::nlp {

struct Token {
  std::string surface;  // text exactly as in the original
  CharSpan span;        // offsets into the original text
  std::size_t sentence = 0;
  std::optional<EntityType> ioc_type;  // set when this token is a restored IOC
  std::string canonical;               // refanged IOC form, empty otherwise

  bool is_ioc() const { return ioc_type.has_value(); }
};

struct Sentence {
  std::size_t first_token = 0;
  std::size_t end_token = 0;  // exclusive
  CharSpan span;
};

struct TokenSeq {
  std::vector<Token> tokens;
  std::vector<Sentence> sentences;

  std::size_t size() const { return tokens.size(); }
};

/// Sentence split and word tokenization over the surrogate text, with each
/// surrogate restored as a single token carrying the original IOC surface.
///
/// Sentence rules: a newline always ends a sentence; '.', '?' or '!' (plus
/// trailing quotes or brackets) ends one when followed by whitespace and
/// then an uppercase letter, a digit, or the end of text, unless the word
/// before the period is a known abbreviation or a single letter.
/// Word rule: [A-Za-z0-9_]+ with internal '-' or '\'' joins; every other
/// non-space character is its own token.
TokenSeq tokenize(const ProtectedText& pt);

/// Word tokenization of plain text with no IOC protection and no sentence
/// splitting (used for gazetteer terms).
std::vector<std::string> word_tokens(std::string_view text);

}  // namespace skg::nlp
