#include "skg/nlp/features.hpp"

#include <algorithm>
#include <cctype>

#include "skg/core/error.hpp"
#include "skg/core/text.hpp"

namespace skg::nlp {

std::string word_shape(std::string_view word) {
  std::string shape;
  for (char c : word) {
    auto uc = static_cast<unsigned char>(c);
    char s = std::isupper(uc) ? 'X' : std::islower(uc) ? 'x' : std::isdigit(uc) ? 'd' : c;
    if (shape.empty() || shape.back() != s) shape.push_back(s);
  }
  return shape;
}

const std::vector<std::string>& FeatureExtractor::default_templates() {
  static const std::vector<std::string> kTemplates = {
      "bias", "word", "lower", "shape", "prefix", "suffix", "prev_word", "next_word", "prev2_word",
      "next2_word", "ioc", "gazetteer"};
  return kTemplates;
}

FeatureExtractor::FeatureExtractor(std::vector<std::string> templates, const GazetteerSet* gazetteers)
    : gazetteers_(gazetteers) {
  set_templates(std::move(templates));
}

void FeatureExtractor::set_templates(std::vector<std::string> templates) {
  const auto& known = default_templates();
  for (const auto& t : templates) {
    if (std::find(known.begin(), known.end(), t) == known.end()) {
      throw Error(ErrorCode::ValidationError, "unknown feature template '" + t + "'");
    }
  }
  templates_ = std::move(templates);
}

namespace {

std::string window_word(const TokenSeq& ts, const Sentence& s, std::ptrdiff_t i) {
  if (i < static_cast<std::ptrdiff_t>(s.first_token)) return "<s>";
  if (i >= static_cast<std::ptrdiff_t>(s.end_token)) return "</s>";
  const auto& tok = ts.tokens[static_cast<std::size_t>(i)];
  if (tok.is_ioc()) return "<ioc:" + std::string(to_string(*tok.ioc_type)) + ">";
  return to_lower_ascii(tok.surface);
}

}  // namespace

std::vector<TokenFeatures> FeatureExtractor::extract(const TokenSeq& ts) const {
  std::vector<TokenFeatures> out(ts.size());

  // Per-token gazetteer flags: "<list>:B" on the first token of a match, ":I" after.
  std::vector<std::vector<std::string>> gaz(ts.size());
  bool want_gaz = std::find(templates_.begin(), templates_.end(), "gazetteer") != templates_.end();
  if (want_gaz && gazetteers_) {
    for (const auto& g : gazetteers_->lists) {
      for (const auto& m : g.find(ts)) {
        for (std::size_t t = m.begin; t < m.end; ++t) {
          gaz[t].push_back(g.name() + (t == m.begin ? ":B" : ":I"));
        }
      }
    }
  }

  for (const auto& sent : ts.sentences) {
    for (std::size_t i = sent.first_token; i < sent.end_token; ++i) {
      const Token& tok = ts.tokens[i];
      auto& f = out[i];
      auto ii = static_cast<std::ptrdiff_t>(i);
      std::string lower = tok.is_ioc() ? window_word(ts, sent, ii) : to_lower_ascii(tok.surface);
      for (const auto& name : templates_) {
        if (name == "bias") {
          f.emplace_back("bias", 1.0);
        } else if (name == "word") {
          if (!tok.is_ioc()) f.emplace_back("w=" + tok.surface, 1.0);
        } else if (name == "lower") {
          f.emplace_back("lw=" + lower, 1.0);
        } else if (name == "shape") {
          if (!tok.is_ioc()) f.emplace_back("shape=" + word_shape(tok.surface), 1.0);
        } else if (name == "prefix") {
          if (tok.is_ioc()) continue;
          for (std::size_t k = 1; k <= 3 && k <= lower.size(); ++k) {
            f.emplace_back("pre" + std::to_string(k) + "=" + lower.substr(0, k), 1.0);
          }
        } else if (name == "suffix") {
          if (tok.is_ioc()) continue;
          for (std::size_t k = 1; k <= 3 && k <= lower.size(); ++k) {
            f.emplace_back("suf" + std::to_string(k) + "=" + lower.substr(lower.size() - k), 1.0);
          }
        } else if (name == "prev_word") {
          f.emplace_back("w-1=" + window_word(ts, sent, ii - 1), 1.0);
        } else if (name == "next_word") {
          f.emplace_back("w+1=" + window_word(ts, sent, ii + 1), 1.0);
        } else if (name == "prev2_word") {
          f.emplace_back("w-2=" + window_word(ts, sent, ii - 2), 1.0);
        } else if (name == "next2_word") {
          f.emplace_back("w+2=" + window_word(ts, sent, ii + 2), 1.0);
        } else if (name == "ioc") {
          if (tok.is_ioc()) f.emplace_back("ioc", 1.0);
        } else if (name == "gazetteer") {
          for (const auto& g : gaz[i]) f.emplace_back("gaz=" + g, 1.0);
        }
      }
      if (hook_) {
        for (auto& fv : hook_(ts, i)) f.push_back(std::move(fv));
      }
    }
  }
  return out;
}

}  // namespace skg::nlp
