#include "skg/nlp/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "skg/core/encoding.hpp"
#include "skg/core/error.hpp"
#include "skg/nlp/labeling.hpp"

namespace skg::nlp {

namespace {

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v) {
  double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

struct ForwardBackward {
  Eigen::MatrixXd alpha;  // n x L
  Eigen::MatrixXd beta;   // n x L
  double log_z = 0.0;
};

ForwardBackward forward_backward(const Eigen::MatrixXd& E, const Eigen::MatrixXd& T, bool need_beta) {
  const Eigen::Index n = E.rows();
  const Eigen::Index L = E.cols();
  ForwardBackward fb;
  fb.alpha.resize(n, L);
  fb.alpha.row(0) = E.row(0);
  Eigen::VectorXd tmp(L);
  for (Eigen::Index t = 1; t < n; ++t) {
    for (Eigen::Index j = 0; j < L; ++j) {
      tmp = fb.alpha.row(t - 1).transpose() + T.col(j);
      fb.alpha(t, j) = E(t, j) + log_sum_exp(tmp);
    }
  }
  fb.log_z = log_sum_exp(fb.alpha.row(n - 1).transpose());
  if (need_beta) {
    fb.beta.resize(n, L);
    fb.beta.row(n - 1).setZero();
    for (Eigen::Index t = n - 2; t >= 0; --t) {
      for (Eigen::Index i = 0; i < L; ++i) {
        tmp = T.row(i).transpose() + E.row(t + 1).transpose() + fb.beta.row(t + 1).transpose();
        fb.beta(t, i) = log_sum_exp(tmp);
      }
    }
  }
  return fb;
}

bool all_finite(const Eigen::MatrixXd& m) { return m.allFinite(); }

}  // namespace

CrfModel::CrfModel(std::vector<std::string> labels, std::vector<std::string> features)
    : labels_(std::move(labels)), features_(std::move(features)) {
  for (std::size_t i = 0; i < features_.size(); ++i) feature_index_.emplace(features_[i], static_cast<int>(i));
  W_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(features_.size()), static_cast<Eigen::Index>(labels_.size()));
  T_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(labels_.size()), static_cast<Eigen::Index>(labels_.size()));
}

int CrfModel::feature_id(const std::string& name) const {
  auto it = feature_index_.find(name);
  return it == feature_index_.end() ? -1 : it->second;
}

int CrfModel::label_id(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  return it == labels_.end() ? -1 : static_cast<int>(it - labels_.begin());
}

EncodedSeq CrfModel::encode(const std::vector<TokenFeatures>& feats, std::size_t begin, std::size_t end) const {
  EncodedSeq x;
  x.reserve(end - begin);
  for (std::size_t t = begin; t < end; ++t) {
    SparseRow row;
    for (const auto& [name, value] : feats[t]) {
      int id = feature_id(name);
      if (id >= 0) row.emplace_back(id, value);
    }
    x.push_back(std::move(row));
  }
  return x;
}

Eigen::MatrixXd CrfModel::emissions(const EncodedSeq& x) const {
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(x.size()), T_.rows());
  for (std::size_t t = 0; t < x.size(); ++t) {
    for (const auto& [f, v] : x[t]) E.row(static_cast<Eigen::Index>(t)) += v * W_.row(f);
  }
  return E;
}

double CrfModel::path_score(const EncodedSeq& x, const std::vector<int>& y) const {
  Eigen::MatrixXd E = emissions(x);
  double s = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    s += E(static_cast<Eigen::Index>(t), y[t]);
    if (t > 0) s += T_(y[t - 1], y[t]);
  }
  return s;
}

double CrfModel::log_partition(const EncodedSeq& x) const {
  if (x.empty()) return 0.0;
  return forward_backward(emissions(x), T_, false).log_z;
}

ViterbiResult CrfModel::viterbi(const EncodedSeq& x) const {
  ViterbiResult res;
  if (x.empty()) return res;
  Eigen::MatrixXd E = emissions(x);
  const Eigen::Index n = E.rows();
  const Eigen::Index L = E.cols();
  Eigen::MatrixXd delta(n, L);
  Eigen::MatrixXi back(n, L);
  delta.row(0) = E.row(0);
  for (Eigen::Index t = 1; t < n; ++t) {
    for (Eigen::Index j = 0; j < L; ++j) {
      Eigen::Index best_i = 0;
      double best = delta(t - 1, 0) + T_(0, j);
      for (Eigen::Index i = 1; i < L; ++i) {
        double s = delta(t - 1, i) + T_(i, j);
        if (s > best) {
          best = s;
          best_i = i;
        }
      }
      delta(t, j) = best + E(t, j);
      back(t, j) = static_cast<int>(best_i);
    }
  }
  Eigen::Index last = 0;
  for (Eigen::Index j = 1; j < L; ++j) {
    if (delta(n - 1, j) > delta(n - 1, last)) last = j;
  }
  res.score = delta(n - 1, last);
  res.path.assign(static_cast<std::size_t>(n), 0);
  res.path[static_cast<std::size_t>(n - 1)] = static_cast<int>(last);
  for (Eigen::Index t = n - 1; t > 0; --t) {
    res.path[static_cast<std::size_t>(t - 1)] = back(t, res.path[static_cast<std::size_t>(t)]);
  }
  return res;
}

double CrfModel::nll(const EncodedSeq& x, const std::vector<int>& y) const {
  if (x.empty()) return 0.0;
  return log_partition(x) - path_score(x, y);
}

double CrfModel::accumulate_gradient(const EncodedSeq& x, const std::vector<int>& y, double scale,
                                     Eigen::MatrixXd& gW, Eigen::MatrixXd& gT) const {
  if (x.empty()) return 0.0;
  Eigen::MatrixXd E = emissions(x);
  auto fb = forward_backward(E, T_, true);
  const Eigen::Index n = E.rows();
  const Eigen::Index L = E.cols();
  double gold = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    Eigen::RowVectorXd marg = (fb.alpha.row(t) + fb.beta.row(t)).array() - fb.log_z;
    marg = marg.array().exp();
    marg(y[static_cast<std::size_t>(t)]) -= 1.0;
    for (const auto& [f, v] : x[static_cast<std::size_t>(t)]) gW.row(f) += (scale * v) * marg;
    gold += E(t, y[static_cast<std::size_t>(t)]);
    if (t > 0) {
      int yp = y[static_cast<std::size_t>(t - 1)];
      int yc = y[static_cast<std::size_t>(t)];
      gold += T_(yp, yc);
      for (Eigen::Index i = 0; i < L; ++i) {
        for (Eigen::Index j = 0; j < L; ++j) {
          gT(i, j) += scale * std::exp(fb.alpha(t - 1, i) + T_(i, j) + E(t, j) + fb.beta(t, j) - fb.log_z);
        }
      }
      gT(yp, yc) -= scale;
    }
  }
  return fb.log_z - gold;
}

bool CrfModel::operator==(const CrfModel& other) const {
  return labels_ == other.labels_ && features_ == other.features_ && W_ == other.W_ && T_ == other.T_ &&
         hyper == other.hyper && templates == other.templates && loss_history == other.loss_history;
}

double crf_objective(const CrfModel& model, const std::vector<LabeledSeq>& data, double l2) {
  double total = 0.0;
  for (const auto& d : data) total += model.nll(d.x, d.y);
  double mean = data.empty() ? 0.0 : total / static_cast<double>(data.size());
  return mean + 0.5 * l2 * (model.W().squaredNorm() + model.T().squaredNorm());
}

double crf_objective_gradient(const CrfModel& model, const std::vector<LabeledSeq>& data, double l2,
                              Eigen::MatrixXd& gW, Eigen::MatrixXd& gT) {
  gW = l2 * model.W();
  gT = l2 * model.T();
  double scale = data.empty() ? 0.0 : 1.0 / static_cast<double>(data.size());
  double total = 0.0;
  for (const auto& d : data) total += model.accumulate_gradient(d.x, d.y, scale, gW, gT);
  return total * scale + 0.5 * l2 * (model.W().squaredNorm() + model.T().squaredNorm());
}

void crf_fit(CrfModel& model, const std::vector<LabeledSeq>& data, const CrfHyper& hyper) {
  model.hyper = hyper;
  model.loss_history.clear();
  const std::size_t batch = std::max<std::size_t>(1, hyper.batch_size);
  std::mt19937_64 rng(hyper.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);

  double lr = hyper.learning_rate;
  double prev = crf_objective(model, data, hyper.l2);
  if (!std::isfinite(prev)) throw Error(ErrorCode::NonfiniteLoss, "initial objective is not finite");

  Eigen::MatrixXd gW = Eigen::MatrixXd::Zero(model.W().rows(), model.W().cols());
  Eigen::MatrixXd gT = Eigen::MatrixXd::Zero(model.T().rows(), model.T().cols());
  std::vector<char> touched(static_cast<std::size_t>(model.W().rows()), 0);
  std::vector<int> touched_rows;

  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    Eigen::MatrixXd saved_W = model.W();
    Eigen::MatrixXd saved_T = model.T();
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t b = 0; b < order.size(); b += batch) {
      std::size_t e = std::min(order.size(), b + batch);
      double scale = 1.0 / static_cast<double>(e - b);
      gT.setZero();
      for (std::size_t k = b; k < e; ++k) {
        const auto& d = data[order[k]];
        for (const auto& row : d.x) {
          for (const auto& fv : row) {
            if (!touched[static_cast<std::size_t>(fv.first)]) {
              touched[static_cast<std::size_t>(fv.first)] = 1;
              touched_rows.push_back(fv.first);
            }
          }
        }
        double loss = model.accumulate_gradient(d.x, d.y, scale, gW, gT);
        if (!std::isfinite(loss)) {
          throw Error(ErrorCode::NonfiniteLoss,
                      fmt::format("non-finite loss at epoch {} sequence {} (lr={})", epoch, order[k], lr));
        }
      }
      // Weight decay on all parameters, data gradient on touched rows.
      model.W() *= (1.0 - lr * hyper.l2);
      model.T() = model.T() * (1.0 - lr * hyper.l2) - lr * gT;
      for (int f : touched_rows) {
        model.W().row(f) -= lr * gW.row(f);
        gW.row(f).setZero();
        touched[static_cast<std::size_t>(f)] = 0;
      }
      touched_rows.clear();
    }
    double loss = crf_objective(model, data, hyper.l2);
    if (!std::isfinite(loss) || !all_finite(model.W()) || !all_finite(model.T())) {
      throw Error(ErrorCode::NonfiniteLoss, fmt::format("non-finite objective after epoch {} (lr={})", epoch, lr));
    }
    if (loss > prev) {
      model.W() = std::move(saved_W);
      model.T() = std::move(saved_T);
      lr *= 0.5;
      model.loss_history.push_back(prev);
    } else {
      prev = loss;
      model.loss_history.push_back(loss);
    }
  }
}

CrfModel crf_train(const std::vector<TrainingExample>& corpus, const FeatureExtractor& fe, const CrfHyper& hyper) {
  if (corpus.empty()) throw Error(ErrorCode::DegenerateCorpus, "training corpus is empty");
  const auto& labels = default_label_set();

  // Vocabulary from training data only, in first-seen order.
  std::vector<std::string> vocab;
  std::unordered_map<std::string, int> seen;
  std::vector<std::vector<TokenFeatures>> all_feats;
  bool any_entity = false;
  for (const auto& ex : corpus) {
    if (ex.labels.size() != ex.tokens.size()) {
      throw Error(ErrorCode::ValidationError, "label count does not match token count");
    }
    if (!is_bio_consistent(ex.labels)) throw Error(ErrorCode::ValidationError, "labels are not BIO-consistent");
    for (const auto& l : ex.labels) {
      if (std::find(labels.begin(), labels.end(), l) == labels.end()) {
        throw Error(ErrorCode::ValidationError, "label '" + l + "' is outside the label set");
      }
      any_entity = any_entity || l != kOutside;
    }
    all_feats.push_back(fe.extract(ex.tokens));
    for (const auto& tf : all_feats.back()) {
      for (const auto& fv : tf) {
        if (seen.emplace(fv.first, static_cast<int>(vocab.size())).second) vocab.push_back(fv.first);
      }
    }
  }
  if (!any_entity) throw Error(ErrorCode::DegenerateCorpus, "every training label is O");

  CrfModel model(labels, std::move(vocab));
  model.templates = fe.templates();
  std::vector<LabeledSeq> data;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& ex = corpus[i];
    for (const auto& s : ex.tokens.sentences) {
      LabeledSeq d;
      d.x = model.encode(all_feats[i], s.first_token, s.end_token);
      for (std::size_t t = s.first_token; t < s.end_token; ++t) d.y.push_back(model.label_id(ex.labels[t]));
      // A sentence boundary can split an entity; restart it with B-.
      std::vector<std::string> tags;
      for (int y : d.y) tags.push_back(labels[static_cast<std::size_t>(y)]);
      repair_bio(tags);
      for (std::size_t t = 0; t < tags.size(); ++t) d.y[t] = model.label_id(tags[t]);
      if (!d.x.empty()) data.push_back(std::move(d));
    }
  }
  crf_fit(model, data, hyper);
  return model;
}

std::vector<std::string> crf_predict_labels(const CrfModel& model, const FeatureExtractor& fe, const TokenSeq& ts) {
  std::vector<std::string> out(ts.size(), kOutside);
  auto feats = fe.extract(ts);
  for (const auto& s : ts.sentences) {
    auto x = model.encode(feats, s.first_token, s.end_token);
    auto v = model.viterbi(x);
    for (std::size_t k = 0; k < v.path.size(); ++k) {
      std::size_t t = s.first_token + k;
      if (!ts.tokens[t].is_ioc()) out[t] = model.labels()[static_cast<std::size_t>(v.path[k])];
    }
  }
  repair_bio(out);
  return out;
}

std::vector<EntityMention> crf_decode(const CrfModel& model, const FeatureExtractor& fe, const TokenSeq& ts,
                                      std::string_view text, const DecodeOptions& opts) {
  std::vector<EntityMention> out;
  auto feats = fe.extract(ts);
  for (const auto& s : ts.sentences) {
    auto x = model.encode(feats, s.first_token, s.end_token);
    auto v = model.viterbi(x);
    if (v.path.empty()) continue;
    double confidence = std::exp(v.score - model.log_partition(x));
    if (confidence < opts.min_confidence) continue;
    std::vector<std::string> tags;
    for (std::size_t k = 0; k < v.path.size(); ++k) {
      bool ioc = ts.tokens[s.first_token + k].is_ioc();
      tags.push_back(ioc ? std::string(kOutside) : model.labels()[static_cast<std::size_t>(v.path[k])]);
    }
    for (const auto& span : bio_spans(tags)) {
      const auto& first = ts.tokens[s.first_token + span.begin];
      const auto& last = ts.tokens[s.first_token + span.end - 1];
      EntityMention m;
      m.span = CharSpan{first.span.start, last.span.end};
      if (!text.empty() && last.span.end <= text.size()) {
        m.surface = std::string(text.substr(first.span.start, last.span.end - first.span.start));
      } else {
        for (std::size_t t = s.first_token + span.begin; t < s.first_token + span.end; ++t) {
          if (!m.surface.empty()) m.surface += ' ';
          m.surface += ts.tokens[t].surface;
        }
      }
      m.etype = span.etype;
      m.confidence = confidence;
      m.provenance = Provenance::Crf;
      out.push_back(std::move(m));
    }
  }
  return out;
}

nlohmann::json to_json(const CrfModel& model) {
  std::vector<double> w(static_cast<std::size_t>(model.W().size()));
  for (Eigen::Index f = 0; f < model.W().rows(); ++f) {
    for (Eigen::Index l = 0; l < model.W().cols(); ++l) {
      w[static_cast<std::size_t>(f * model.W().cols() + l)] = model.W()(f, l);
    }
  }
  std::vector<double> t;
  for (Eigen::Index i = 0; i < model.T().rows(); ++i) {
    for (Eigen::Index j = 0; j < model.T().cols(); ++j) t.push_back(model.T()(i, j));
  }
  return nlohmann::json{
      {"labels", model.labels()},
      {"features", model.features()},
      {"emission_weights", w},
      {"transition_weights", t},
      {"templates", model.templates},
      {"loss_history", model.loss_history},
      {"training", {{"l2", model.hyper.l2},
                    {"epochs", model.hyper.epochs},
                    {"learning_rate", model.hyper.learning_rate},
                    {"seed", model.hyper.seed},
                    {"batch_size", model.hyper.batch_size}}},
  };
}

CrfModel crf_model_from_json(const nlohmann::json& j) {
  CrfModel model(j.at("labels").get<std::vector<std::string>>(), j.at("features").get<std::vector<std::string>>());
  auto w = j.at("emission_weights").get<std::vector<double>>();
  auto t = j.at("transition_weights").get<std::vector<double>>();
  const auto L = static_cast<std::size_t>(model.num_labels());
  if (w.size() != model.num_features() * L) {
    throw Error(ErrorCode::MalformedEncoding, "emission weight count does not match |F|*|L|");
  }
  if (t.size() != L * L) throw Error(ErrorCode::MalformedEncoding, "transition weight count is not |L|^2");
  for (std::size_t k = 0; k < w.size(); ++k) {
    model.W()(static_cast<Eigen::Index>(k / L), static_cast<Eigen::Index>(k % L)) = w[k];
  }
  for (std::size_t k = 0; k < t.size(); ++k) {
    model.T()(static_cast<Eigen::Index>(k / L), static_cast<Eigen::Index>(k % L)) = t[k];
  }
  if (!model.W().allFinite() || !model.T().allFinite()) {
    throw Error(ErrorCode::MalformedEncoding, "model weights are not finite");
  }
  model.templates = j.at("templates").get<std::vector<std::string>>();
  model.loss_history = j.at("loss_history").get<std::vector<double>>();
  const auto& tr = j.at("training");
  model.hyper.l2 = tr.at("l2").get<double>();
  model.hyper.epochs = tr.at("epochs").get<int>();
  model.hyper.learning_rate = tr.at("learning_rate").get<double>();
  model.hyper.seed = tr.at("seed").get<std::uint64_t>();
  model.hyper.batch_size = tr.at("batch_size").get<std::size_t>();
  return model;
}

std::string serialize(const CrfModel& model) { return encode_envelope(TypeTag::CrfModel, to_json(model)); }

CrfModel deserialize_crf_model(std::string_view bytes) {
  auto j = decode_envelope(bytes, TypeTag::CrfModel);
  try {
    return crf_model_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedEncoding, std::string("invalid model body: ") + e.what());
  }
}

}  // namespace skg::nlp
