#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "skg/core/types.hpp"
#include "skg/nlp/features.hpp"
#include "skg/nlp/tokenizer.hpp"

namespace skg::nlp {

/// Feature indices and values for one token.
using SparseRow = std::vector<std::pair<int, double>>;
/// One sequence of tokens in feature-index form.
using EncodedSeq = std::vector<SparseRow>;

struct CrfHyper {
  double l2 = 1e-3;
  int epochs = 30;
  double learning_rate = 0.1;
  std::uint64_t seed = 42;
  std::size_t batch_size = 16;

  bool operator==(const CrfHyper&) const = default;
};

struct ViterbiResult {
  std::vector<int> path;
  double score = 0.0;
};

/// Linear-chain CRF. Score of a label path y over x:
///   sum_t sum_f x[t][f] * W(f, y_t) + sum_{t>0} T(y_{t-1}, y_t)
/// There are no start or stop transitions.
class CrfModel {
 public:
  CrfModel() = default;
  CrfModel(std::vector<std::string> labels, std::vector<std::string> features);

  std::size_t num_labels() const { return labels_.size(); }
  std::size_t num_features() const { return features_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<std::string>& features() const { return features_; }
  int feature_id(const std::string& name) const;  // -1 when unknown
  int label_id(const std::string& label) const;   // -1 when unknown

  Eigen::MatrixXd& W() { return W_; }
  Eigen::MatrixXd& T() { return T_; }
  const Eigen::MatrixXd& W() const { return W_; }
  const Eigen::MatrixXd& T() const { return T_; }

  CrfHyper hyper;
  std::vector<std::string> templates;
  std::vector<double> loss_history;

  /// Maps named features to indices, dropping names outside the vocabulary.
  EncodedSeq encode(const std::vector<TokenFeatures>& feats, std::size_t begin, std::size_t end) const;

  /// n x L emission scores.
  Eigen::MatrixXd emissions(const EncodedSeq& x) const;
  double path_score(const EncodedSeq& x, const std::vector<int>& y) const;
  double log_partition(const EncodedSeq& x) const;
  /// Max-product decoding. Ties resolve toward the lower label index, both
  /// for back-pointers and for the final label.
  ViterbiResult viterbi(const EncodedSeq& x) const;

  /// Negative log-likelihood of one labeled sequence.
  double nll(const EncodedSeq& x, const std::vector<int>& y) const;
  /// Adds scale * d nll / d(W, T) into gW and gT. Returns nll.
  double accumulate_gradient(const EncodedSeq& x, const std::vector<int>& y, double scale,
                             Eigen::MatrixXd& gW, Eigen::MatrixXd& gT) const;

  bool operator==(const CrfModel& other) const;

 private:
  std::vector<std::string> labels_;
  std::vector<std::string> features_;
  std::unordered_map<std::string, int> feature_index_;
  Eigen::MatrixXd W_;  // F x L
  Eigen::MatrixXd T_;  // L x L, row = previous label
};

struct LabeledSeq {
  EncodedSeq x;
  std::vector<int> y;
};

/// Mean NLL over `data` plus (l2 / 2) * (|W|^2 + |T|^2).
double crf_objective(const CrfModel& model, const std::vector<LabeledSeq>& data, double l2);
/// Gradient of crf_objective; returns the objective.
double crf_objective_gradient(const CrfModel& model, const std::vector<LabeledSeq>& data, double l2,
                              Eigen::MatrixXd& gW, Eigen::MatrixXd& gT);

struct TrainingExample {
  TokenSeq tokens;
  std::vector<std::string> labels;  // one BIO tag per token
};

/// Mini-batch SGD on the regularized objective. After each epoch the full
/// objective is evaluated; an epoch that raises it is rolled back and the
/// learning rate halved, so `loss_history` never increases.
/// Throws ValidationError (inconsistent BIO), DegenerateCorpus (empty or all
/// O), NonfiniteLoss.
CrfModel crf_train(const std::vector<TrainingExample>& corpus, const FeatureExtractor& fe,
                   const CrfHyper& hyper);

/// Lower-level entry used by crf_train and tests: trains in place on
/// already-encoded data.
void crf_fit(CrfModel& model, const std::vector<LabeledSeq>& data, const CrfHyper& hyper);

struct DecodeOptions {
  double min_confidence = 0.0;
};

/// Per-sentence Viterbi; BIO spans become mentions with confidence equal to
/// the sentence path probability. Labels on IOC tokens are ignored. When
/// `text` is given, surfaces are taken from it by span.
std::vector<EntityMention> crf_decode(const CrfModel& model, const FeatureExtractor& fe, const TokenSeq& ts,
                                      std::string_view text = {}, const DecodeOptions& opts = {});

/// Token-level labels for the whole sequence (IOC tokens forced to O).
std::vector<std::string> crf_predict_labels(const CrfModel& model, const FeatureExtractor& fe,
                                            const TokenSeq& ts);

nlohmann::json to_json(const CrfModel& model);
CrfModel crf_model_from_json(const nlohmann::json& j);
std::string serialize(const CrfModel& model);
CrfModel deserialize_crf_model(std::string_view bytes);

}  // namespace skg::nlp
