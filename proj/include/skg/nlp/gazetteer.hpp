#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "skg/core/types.hpp"
#include "skg/nlp/tokenizer.hpp"

namespace skg::nlp {

/// Entity types recognized by the sequence model (the non-IOC types that
/// appear in running text). Order is the tie-break priority.
const std::vector<EntityType>& ner_types();

/// Curated list of names for one entity type, matched on lowercased
/// tokens with longest-match-first.
class Gazetteer {
 public:
  Gazetteer(std::string name, EntityType etype) : name_(std::move(name)), etype_(etype) {}

  /// One term per line; blank lines and lines starting with '#' are skipped.
  /// Throws GazetteerMissing when the file does not exist.
  static Gazetteer load(const std::filesystem::path& file, std::string name, EntityType etype);

  void add_term(std::string_view term);

  const std::string& name() const { return name_; }
  EntityType etype() const { return etype_; }
  std::size_t size() const { return term_count_; }

  struct Match {
    std::size_t begin = 0;
    std::size_t end = 0;  // exclusive token index
  };
  /// Non-overlapping longest matches within each sentence, left to right.
  std::vector<Match> find(const TokenSeq& ts) const;

 private:
  struct TrieNode {
    std::map<std::string, std::size_t> next;
    bool terminal = false;
  };
  std::string name_;
  EntityType etype_;
  std::vector<TrieNode> trie_{TrieNode{}};
  std::size_t term_count_ = 0;
};

struct GazetteerSet {
  std::vector<Gazetteer> lists;

  /// Loads `{actors,techniques,tools,malware,software}.txt` from `dir`.
  static GazetteerSet load_dir(const std::filesystem::path& dir);
};

}  // namespace skg::nlp
