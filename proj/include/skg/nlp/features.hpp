#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "skg/nlp/gazetteer.hpp"
#include "skg/nlp/tokenizer.hpp"

namespace skg::nlp {

/// A named feature with a real value (1.0 for indicator features).
using FeatureValue = std::pair<std::string, double>;
using TokenFeatures = std::vector<FeatureValue>;

/// Optional hook for externally computed token vectors. Receives the
/// sequence and token index; returns (name, value) pairs such as
/// ("vec:17", 0.23). Disabled unless set.
using ExternalVectorHook = std::function<TokenFeatures(const TokenSeq&, std::size_t)>;

/// Word shape with runs collapsed: "WannaCry" -> "XxXx", "APT28" -> "Xd".
std::string word_shape(std::string_view word);

class FeatureExtractor {
 public:
  /// All built-in templates in emission order.
  static const std::vector<std::string>& default_templates();

  explicit FeatureExtractor(std::vector<std::string> templates = default_templates(),
                            const GazetteerSet* gazetteers = nullptr);

  /// Throws ValidationError on an unknown template name.
  void set_templates(std::vector<std::string> templates);
  const std::vector<std::string>& templates() const { return templates_; }

  void set_gazetteers(const GazetteerSet* gazetteers) { gazetteers_ = gazetteers; }
  void set_external_hook(ExternalVectorHook hook) { hook_ = std::move(hook); }

  /// Features for every token, computed within sentence windows.
  std::vector<TokenFeatures> extract(const TokenSeq& ts) const;

 private:
  std::vector<std::string> templates_;
  const GazetteerSet* gazetteers_ = nullptr;
  ExternalVectorHook hook_;
};

}  // namespace skg::nlp
