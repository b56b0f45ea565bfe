#include "skg/nlp/tokenizer.hpp"

#include <cctype>
#include <set>

#include "skg/core/text.hpp"

namespace skg::nlp {

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

const std::set<std::string, std::less<>>& abbreviations() {
  static const std::set<std::string, std::less<>> kAbbrev = {
      "al",  "approx", "co",  "corp", "dept", "dr",  "eg",  "etc", "fig", "ie",  "inc",
      "jr",  "ltd",    "mr",  "mrs",  "ms",   "no",  "nos", "prof", "sr", "st",  "vol",
      "vs",  "jan",    "feb", "mar",  "apr",  "jun", "jul", "aug", "sep", "sept", "oct",
      "nov", "dec",    "ver", "est",  "min",  "max", "cf"};
  return kAbbrev;
}

// Offsets in `s` after which a sentence ends.
std::vector<std::size_t> sentence_ends(std::string_view s) {
  std::vector<std::size_t> ends;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '\n') {
      ends.push_back(i);
      continue;
    }
    if (c != '.' && c != '?' && c != '!') continue;
    std::size_t j = i + 1;
    while (j < s.size() && (s[j] == '"' || s[j] == '\'' || s[j] == ')' || s[j] == ']')) ++j;
    if (j < s.size() && !is_ws(s[j])) continue;
    std::size_t k = j;
    while (k < s.size() && is_ws(s[k]) && s[k] != '\n') ++k;
    if (k < s.size() && s[k] != '\n') {
      unsigned char next = static_cast<unsigned char>(s[k]);
      if (!std::isupper(next) && !std::isdigit(next) && next != '"' && next != '\'' && next != '(') continue;
    }
    if (c == '.') {
      std::size_t w = i;
      while (w > 0 && std::isalpha(static_cast<unsigned char>(s[w - 1]))) --w;
      std::string_view word = s.substr(w, i - w);
      if (word.size() == 1) continue;
      if (abbreviations().contains(to_lower_ascii(word))) continue;
    }
    ends.push_back(j - 1);
    i = j - 1;
  }
  return ends;
}

}  // namespace

TokenSeq tokenize(const ProtectedText& pt) {
  const std::string& s = pt.surrogate_text;
  TokenSeq seq;
  auto ends = sentence_ends(s);
  std::size_t end_idx = 0;
  std::size_t sentence = 0;
  std::size_t next_span = 0;
  bool sentence_has_tokens = false;

  auto advance_sentence = [&](std::size_t pos) {
    while (end_idx < ends.size() && ends[end_idx] < pos) {
      ++end_idx;
      if (sentence_has_tokens) {
        ++sentence;
        sentence_has_tokens = false;
      }
    }
  };

  auto emit = [&](std::size_t start, std::size_t end) {
    advance_sentence(start);
    Token t;
    std::size_t os = pt.to_original(start);
    std::size_t oe = pt.to_original(end);
    t.span = {os, oe};
    t.surface = s.substr(start, end - start);
    t.sentence = sentence;
    seq.tokens.push_back(std::move(t));
    sentence_has_tokens = true;
  };

  std::size_t i = 0;
  while (i < s.size()) {
    if (next_span < pt.span_map.size() && pt.span_map[next_span].surrogate.start == i) {
      const auto& sp = pt.span_map[next_span];
      advance_sentence(i);
      Token t;
      t.span = sp.original;
      t.surface = sp.surface;
      t.sentence = sentence;
      t.ioc_type = sp.ioc_type;
      t.canonical = sp.canonical;
      seq.tokens.push_back(std::move(t));
      sentence_has_tokens = true;
      i = sp.surrogate.end;
      ++next_span;
      continue;
    }
    char c = s[i];
    if (is_ws(c)) {
      ++i;
      continue;
    }
    std::size_t start = i;
    if (is_word_char(c)) {
      ++i;
      while (i < s.size()) {
        if (next_span < pt.span_map.size() && pt.span_map[next_span].surrogate.start == i) break;
        if (is_word_char(s[i])) {
          ++i;
        } else if ((s[i] == '-' || s[i] == '\'') && i + 1 < s.size() && is_word_char(s[i + 1]) &&
                   !(next_span < pt.span_map.size() && pt.span_map[next_span].surrogate.start == i + 1)) {
          i += 2;
        } else {
          break;
        }
      }
    } else {
      ++i;
    }
    emit(start, i);
  }

  for (std::size_t t = 0; t < seq.tokens.size(); ++t) {
    const auto& tok = seq.tokens[t];
    if (seq.sentences.size() <= tok.sentence) {
      seq.sentences.push_back({t, t + 1, tok.span});
    } else {
      auto& sent = seq.sentences[tok.sentence];
      sent.end_token = t + 1;
      sent.span.end = tok.span.end;
    }
  }
  return seq;
}

std::vector<std::string> word_tokens(std::string_view text) {
  ProtectedText pt{std::string(text), {}};
  auto seq = tokenize(pt);
  std::vector<std::string> out;
  out.reserve(seq.tokens.size());
  for (auto& t : seq.tokens) out.push_back(std::move(t.surface));
  return out;
}

}  // namespace skg::nlp
