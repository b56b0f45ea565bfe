#include "skg/nlp/ner_eval.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <tuple>

#include "skg/core/error.hpp"

namespace skg::nlp {

std::vector<GoldSentence> load_ner_gold(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(ErrorCode::IoError, "cannot open NER gold file '" + file.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ValidationError, std::string("NER gold file is not JSON: ") + e.what());
  }
  std::vector<GoldSentence> out;
  for (const auto& s : j.at("sentences")) {
    GoldSentence gs;
    gs.text = s.at("text").get<std::string>();
    std::size_t cursor = 0;
    for (const auto& e : s.at("entities")) {
      auto etype = entity_type_from_string(e.at("type").get<std::string>());
      if (!etype) throw Error(ErrorCode::ValidationError, "unknown entity type in gold: " + e.at("type").dump());
      GoldEntity ge;
      ge.etype = *etype;
      if (e.contains("start")) {
        ge.span = {e.at("start").get<std::size_t>(), e.at("end").get<std::size_t>()};
      } else {
        auto surface = e.at("text").get<std::string>();
        auto pos = gs.text.find(surface, cursor);
        if (pos == std::string::npos) {
          throw Error(ErrorCode::ValidationError, "gold entity '" + surface + "' not found in: " + gs.text);
        }
        ge.span = {pos, pos + surface.size()};
      }
      if (ge.span.end > gs.text.size() || ge.span.start >= ge.span.end) {
        throw Error(ErrorCode::ValidationError, "gold span out of range in: " + gs.text);
      }
      cursor = ge.span.end;
      gs.entities.push_back(ge);
    }
    out.push_back(std::move(gs));
  }
  return out;
}

double PrfCounts::precision() const { return tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp); }
double PrfCounts::recall() const { return tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn); }
double PrfCounts::f1() const {
  double p = precision();
  double r = recall();
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

PrfCounts NerScores::micro(const std::vector<EntityType>& types) const {
  PrfCounts total;
  for (const auto& [t, c] : per_type) {
    if (!types.empty() && std::find(types.begin(), types.end(), t) == types.end()) continue;
    total.tp += c.tp;
    total.fp += c.fp;
    total.fn += c.fn;
  }
  return total;
}

nlohmann::json NerScores::to_json() const {
  auto row = [](const PrfCounts& c) {
    return nlohmann::json{{"tp", c.tp},           {"fp", c.fp},         {"fn", c.fn},
                          {"precision", c.precision()}, {"recall", c.recall()}, {"f1", c.f1()}};
  };
  nlohmann::json j;
  for (const auto& [t, c] : per_type) j["per_type"][std::string(to_string(t))] = row(c);
  j["micro"] = row(micro());
  return j;
}

NerScores evaluate_ner(const std::vector<GoldSentence>& gold, const MentionFn& predict) {
  using Key = std::tuple<std::size_t, std::size_t, EntityType>;
  NerScores scores;
  for (const auto& s : gold) {
    std::set<Key> g;
    for (const auto& e : s.entities) g.insert({e.span.start, e.span.end, e.etype});
    std::set<Key> p;
    for (const auto& m : predict(s.text)) {
      if (m.span) p.insert({m.span->start, m.span->end, m.etype});
    }
    for (const auto& k : p) {
      auto& c = scores.per_type[std::get<2>(k)];
      if (g.contains(k)) {
        ++c.tp;
      } else {
        ++c.fp;
      }
    }
    for (const auto& k : g) {
      if (!p.contains(k)) ++scores.per_type[std::get<2>(k)].fn;
    }
  }
  return scores;
}

}  // namespace skg::nlp
