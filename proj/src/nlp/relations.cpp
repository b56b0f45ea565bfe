#include "skg/nlp/relations.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "skg/core/error.hpp"
#include "skg/core/text.hpp"

namespace skg::nlp {

namespace {

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

std::vector<std::string> regular_forms(const std::string& lemma) {
  std::vector<std::string> forms{lemma};
  if (lemma.empty()) return forms;
  char last = lemma.back();
  std::size_t n = lemma.size();
  if (last == 'e') {
    forms.push_back(lemma + "s");
    forms.push_back(lemma + "d");
    forms.push_back(lemma.substr(0, n - 1) + "ing");
  } else if (last == 'y' && n > 1 && !is_vowel(lemma[n - 2])) {
    forms.push_back(lemma.substr(0, n - 1) + "ies");
    forms.push_back(lemma.substr(0, n - 1) + "ied");
    forms.push_back(lemma + "ing");
  } else {
    bool sibilant = last == 's' || last == 'x' || last == 'z' || lemma.ends_with("ch") || lemma.ends_with("sh");
    forms.push_back(lemma + (sibilant ? "es" : "s"));
    forms.push_back(lemma + "ed");
    forms.push_back(lemma + "ing");
    // Short consonant-vowel-consonant stems double the final consonant.
    if (n >= 3 && !is_vowel(last) && last != 'w' && last != 'x' && last != 'y' && is_vowel(lemma[n - 2]) &&
        !is_vowel(lemma[n - 3])) {
      forms.push_back(lemma + last + "ed");
      forms.push_back(lemma + last + "ing");
    }
  }
  return forms;
}

const std::set<std::string, std::less<>>& be_forms() {
  static const std::set<std::string, std::less<>> kBe = {"is", "are", "was", "were", "be", "been", "being", "gets",
                                                        "got", "get"};
  return kBe;
}

}  // namespace

VerbLexicon VerbLexicon::builtin() {
  VerbLexicon lex;
  for (const char* v : {"drop", "download", "create", "connect", "inject", "delete", "modify", "use", "exploit",
                        "upload", "execute", "install", "encrypt", "target", "deploy", "launch", "leverage",
                        "load", "spawn", "contact", "communicate", "exfiltrate", "infect", "attribute",
                        "distribute", "compromise", "resolve", "beacon", "access", "read", "persist"}) {
    lex.add(v);
  }
  lex.add("send", {"sent"});
  lex.add("write", {"wrote", "written", "writes", "writing"});
  lex.add("steal", {"stole", "stolen"});
  lex.add("run", {"ran"});
  return lex;
}

VerbLexicon VerbLexicon::load(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::IoError, "cannot open relation verb lexicon '" + file.string() + "'");
  VerbLexicon lex;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string lemma;
    if (!(ss >> lemma)) continue;
    std::vector<std::string> irregular;
    for (std::string w; ss >> w;) irregular.push_back(to_lower_ascii(w));
    lex.add(to_lower_ascii(lemma), irregular);
  }
  return lex;
}

void VerbLexicon::add(const std::string& lemma, const std::vector<std::string>& irregular) {
  if (std::find(lemmas_.begin(), lemmas_.end(), lemma) == lemmas_.end()) lemmas_.push_back(lemma);
  for (const auto& f : regular_forms(lemma)) forms_.try_emplace(f, lemma);
  for (const auto& f : irregular) forms_.try_emplace(f, lemma);
}

std::optional<std::string> VerbLexicon::lemma_of(std::string_view word) const {
  auto it = forms_.find(to_lower_ascii(word));
  if (it == forms_.end()) return std::nullopt;
  return it->second;
}

std::string relation_label(std::string_view lemma) {
  std::string out;
  for (char c : lemma) {
    if (c == '-' || c == ' ') {
      out.push_back('_');
    } else {
      out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

std::vector<RelationMention> extract_relations(const TokenSeq& ts, const std::vector<EntityMention>& entities,
                                               const VerbLexicon& lexicon) {
  struct Placed {
    std::size_t index;  // into entities
    std::size_t first;  // token range
    std::size_t last;
    std::size_t sentence;
  };
  std::vector<Placed> placed;
  for (std::size_t e = 0; e < entities.size(); ++e) {
    if (!entities[e].span) continue;
    const CharSpan sp = *entities[e].span;
    std::optional<std::size_t> first;
    std::size_t last = 0;
    for (std::size_t t = 0; t < ts.size(); ++t) {
      const auto& tk = ts.tokens[t].span;
      if (tk.start >= sp.start && tk.end <= sp.end) {
        if (!first) first = t;
        last = t;
      }
    }
    if (!first) continue;
    placed.push_back({e, *first, last, ts.tokens[*first].sentence});
  }
  std::stable_sort(placed.begin(), placed.end(), [](const Placed& a, const Placed& b) { return a.first < b.first; });

  std::vector<RelationMention> out;
  for (std::size_t k = 0; k + 1 < placed.size(); ++k) {
    const Placed& a = placed[k];
    const Placed& b = placed[k + 1];
    if (a.sentence != b.sentence || b.first <= a.last) continue;
    for (std::size_t t = a.last + 1; t < b.first; ++t) {
      auto lemma = lexicon.lemma_of(ts.tokens[t].surface);
      if (!lemma) continue;
      bool passive = t > a.last + 1 && be_forms().contains(to_lower_ascii(ts.tokens[t - 1].surface)) &&
                     t + 1 < b.first && to_lower_ascii(ts.tokens[t + 1].surface) == "by";
      RelationMention r;
      r.head = passive ? b.index : a.index;
      r.tail = passive ? a.index : b.index;
      if (r.head == r.tail) break;
      r.verb = relation_label(*lemma);
      r.evidence_span = {ts.tokens[a.first].span.start, ts.tokens[b.last].span.end};
      r.confidence = std::min(entities[a.index].confidence, entities[b.index].confidence);
      out.push_back(std::move(r));
      break;
    }
  }
  return out;
}

}  // namespace skg::nlp
