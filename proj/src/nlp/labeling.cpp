#include "skg/nlp/labeling.hpp"

#include <algorithm>

#include "skg/core/error.hpp"

namespace skg::nlp {

namespace {

// Lower rank wins ties.
std::size_t label_rank(const std::string& label) {
  auto parsed = parse_label(label);
  const auto& types = ner_types();
  auto it = std::find(types.begin(), types.end(), *parsed.etype);
  std::size_t type_rank = static_cast<std::size_t>(it - types.begin());
  if (it == types.end()) type_rank = types.size() + static_cast<std::size_t>(*parsed.etype);
  return type_rank * 2 + (parsed.prefix == 'B' ? 0 : 1);
}

}  // namespace

std::string bio_label(char prefix, EntityType etype) {
  return std::string(1, prefix) + "-" + std::string(to_string(etype));
}

ParsedLabel parse_label(const std::string& label) {
  if (label == kOutside) return {};
  if (label.size() > 2 && (label[0] == 'B' || label[0] == 'I') && label[1] == '-') {
    if (auto t = entity_type_from_string(label.substr(2))) return {label[0], *t};
  }
  throw Error(ErrorCode::ValidationError, "'" + label + "' is not a BIO label");
}

const std::vector<std::string>& default_label_set() {
  static const std::vector<std::string> labels = [] {
    std::vector<std::string> out{kOutside};
    for (auto t : ner_types()) {
      out.push_back(bio_label('B', t));
      out.push_back(bio_label('I', t));
    }
    return out;
  }();
  return labels;
}

std::size_t repair_bio(std::vector<std::string>& labels) {
  std::size_t repairs = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto cur = parse_label(labels[i]);
    if (cur.prefix != 'I') continue;
    bool ok = false;
    if (i > 0) {
      auto prev = parse_label(labels[i - 1]);
      ok = prev.prefix != 'O' && prev.etype == cur.etype;
    }
    if (!ok) {
      labels[i] = bio_label('B', *cur.etype);
      ++repairs;
    }
  }
  return repairs;
}

bool is_bio_consistent(const std::vector<std::string>& labels) {
  auto copy = labels;
  return repair_bio(copy) == 0;
}

std::vector<LabeledSpan> bio_spans(const std::vector<std::string>& labels) {
  std::vector<LabeledSpan> spans;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto cur = parse_label(labels[i]);
    if (cur.prefix == 'O') continue;
    bool extends = cur.prefix == 'I' && !spans.empty() && spans.back().end == i && spans.back().etype == *cur.etype;
    if (extends) {
      spans.back().end = i + 1;
    } else {
      spans.push_back({i, i + 1, *cur.etype});
    }
  }
  return spans;
}

std::vector<LabelingFunctionVote> LabelingFunction::apply(const TokenSeq& ts) const {
  std::vector<LabelingFunctionVote> votes;
  for (const auto& m : gazetteer->find(ts)) {
    votes.push_back({name, m.begin, m.end, bio_label('B', gazetteer->etype())});
  }
  return votes;
}

std::vector<LabelingFunction> make_labeling_functions(const GazetteerSet& gazetteers,
                                                      const std::map<std::string, double>& weights) {
  std::vector<LabelingFunction> lfs;
  for (const auto& g : gazetteers.lists) {
    auto it = weights.find(g.name());
    lfs.push_back({g.name(), &g, it == weights.end() ? 1.0 : it->second});
  }
  return lfs;
}

LabelSynthesis synthesize_labels(const TokenSeq& ts, const std::vector<LabelingFunction>& lfs) {
  LabelSynthesis out;
  const std::size_t n = ts.size();
  std::vector<std::map<std::string, double>> tallies(n);
  for (const auto& lf : lfs) {
    for (auto& vote : lf.apply(ts)) {
      auto etype = *parse_label(vote.label).etype;
      for (std::size_t t = vote.begin; t < vote.end; ++t) {
        tallies[t][bio_label(t == vote.begin ? 'B' : 'I', etype)] += lf.weight;
      }
      out.votes.push_back(std::move(vote));
    }
  }
  out.labels.assign(n, kOutside);
  out.confidence.assign(n, 1.0);
  for (std::size_t t = 0; t < n; ++t) {
    const auto& tally = tallies[t];
    if (tally.empty()) continue;
    double total = 0.0;
    double best = -1.0;
    for (const auto& [label, w] : tally) {
      total += w;
      best = std::max(best, w);
    }
    std::vector<std::string> leaders;
    for (const auto& [label, w] : tally) {
      if (w == best) leaders.push_back(label);
    }
    std::sort(leaders.begin(), leaders.end(),
              [](const std::string& a, const std::string& b) { return label_rank(a) < label_rank(b); });
    out.labels[t] = leaders.front();
    out.confidence[t] = total > 0 ? best / total : 1.0;
    if (leaders.size() > 1) out.ties.push_back({t, leaders, leaders.front()});
  }
  out.repairs = repair_bio(out.labels);
  return out;
}

}  // namespace skg::nlp
