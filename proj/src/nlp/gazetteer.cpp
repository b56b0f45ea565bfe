#include "skg/nlp/gazetteer.hpp"

#include <fstream>

#include "skg/core/error.hpp"
#include "skg/core/text.hpp"

namespace skg::nlp {

const std::vector<EntityType>& ner_types() {
  static const std::vector<EntityType> kTypes = {EntityType::ThreatActor, EntityType::ReportMalware,
                                                 EntityType::Technique, EntityType::Tool,
                                                 EntityType::Software};
  return kTypes;
}

Gazetteer Gazetteer::load(const std::filesystem::path& file, std::string name, EntityType etype) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::GazetteerMissing, "cannot open gazetteer '" + file.string() + "'");
  Gazetteer g(std::move(name), etype);
  std::string line;
  while (std::getline(in, line)) {
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    g.add_term(t);
  }
  return g;
}

void Gazetteer::add_term(std::string_view term) {
  auto words = word_tokens(to_lower_ascii(term));
  if (words.empty()) return;
  std::size_t node = 0;
  for (const auto& w : words) {
    auto it = trie_[node].next.find(w);
    if (it == trie_[node].next.end()) {
      trie_.push_back({});
      it = trie_[node].next.emplace(w, trie_.size() - 1).first;
    }
    node = it->second;
  }
  if (!trie_[node].terminal) ++term_count_;
  trie_[node].terminal = true;
}

std::vector<Gazetteer::Match> Gazetteer::find(const TokenSeq& ts) const {
  std::vector<Match> matches;
  std::vector<std::string> lowered;
  lowered.reserve(ts.size());
  for (const auto& t : ts.tokens) lowered.push_back(to_lower_ascii(t.surface));
  for (const auto& sent : ts.sentences) {
    std::size_t i = sent.first_token;
    while (i < sent.end_token) {
      std::size_t node = 0;
      std::size_t best = 0;
      for (std::size_t j = i; j < sent.end_token; ++j) {
        if (ts.tokens[j].is_ioc()) break;
        auto it = trie_[node].next.find(lowered[j]);
        if (it == trie_[node].next.end()) break;
        node = it->second;
        if (trie_[node].terminal) best = j + 1;
      }
      if (best > i) {
        matches.push_back({i, best});
        i = best;
      } else {
        ++i;
      }
    }
  }
  return matches;
}

GazetteerSet GazetteerSet::load_dir(const std::filesystem::path& dir) {
  GazetteerSet set;
  set.lists.push_back(Gazetteer::load(dir / "actors.txt", "actors", EntityType::ThreatActor));
  set.lists.push_back(Gazetteer::load(dir / "malware.txt", "malware", EntityType::ReportMalware));
  set.lists.push_back(Gazetteer::load(dir / "techniques.txt", "techniques", EntityType::Technique));
  set.lists.push_back(Gazetteer::load(dir / "tools.txt", "tools", EntityType::Tool));
  set.lists.push_back(Gazetteer::load(dir / "software.txt", "software", EntityType::Software));
  return set;
}

}  // namespace skg::nlp
