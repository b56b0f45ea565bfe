#include <memory>

#include "skg/core/error.hpp"
#include "skg/kgraph/store.hpp"
#include "skg/nlp/extractor.hpp"
#include "skg/nlp/ioc.hpp"
#include "skg/nlp/tokenizer.hpp"
#include "skg/parsers/parser.hpp"
#include "skg/pipeline/components.hpp"

namespace skg::pipeline {

std::unique_ptr<Component> make_grouping_porter();
std::unique_ptr<Component> make_min_text_length(const StageDescriptor& d);
std::unique_ptr<Component> make_ad_keyword_density(const StageDescriptor& d);
std::unique_ptr<Component> make_duplicate_content_hash();

namespace {

class TemplateParser final : public Parser {
 public:
  explicit TemplateParser(std::shared_ptr<const parsers::TemplateSet> templates) : templates_(std::move(templates)) {}
  CtiRecord parse(const ReportDoc& doc) override {
    return parsers::parse(doc, parsers::detect_source(doc, *templates_));
  }

 private:
  std::shared_ptr<const parsers::TemplateSet> templates_;
};

class CrfExtractor final : public Extractor {
 public:
  explicit CrfExtractor(std::shared_ptr<const nlp::ExtractorResources> res) : res_(std::move(res)) {}
  void extract(CtiRecord& rec) override { nlp::extract_record(rec, *res_); }

 private:
  std::shared_ptr<const nlp::ExtractorResources> res_;
};

// IOC-only: structured table plus regex over the body, no relations.
class RegexExtractor final : public Extractor {
 public:
  void extract(CtiRecord& rec) override {
    rec.entities = nlp::extract_structured_iocs(rec);
    auto ts = nlp::tokenize(nlp::protect_iocs(rec.body_text));
    for (auto& m : nlp::extract_iocs_regex(ts)) rec.entities.push_back(std::move(m));
    rec.relations.clear();
    rec.log("extract", "regex: " + std::to_string(rec.entities.size()) + " mentions");
  }
};

class EmbeddedConnector final : public Connector {
 public:
  explicit EmbeddedConnector(kgraph::GraphStore* store) : store_(store) {}
  kgraph::MergeDelta connect(const CtiRecord& rec) override {
    return store_->merge(kgraph::refactor_to_ontology(rec));
  }

 private:
  kgraph::GraphStore* store_;
};

[[noreturn]] void missing(const std::string& what, const std::string& name) {
  throw Error(ErrorCode::BuildError, name + " needs " + what);
}

}  // namespace

void register_builtin_components(Registry& r) {
  r.register_component(StageKind::Porter, "grouping",
                       [](const StageDescriptor&, BuildContext&) { return make_grouping_porter(); });
  r.register_component(StageKind::Checker, "duplicate-content-hash",
                       [](const StageDescriptor&, BuildContext&) { return make_duplicate_content_hash(); });
  r.register_component(StageKind::Checker, "min-text-length",
                       [](const StageDescriptor& d, BuildContext&) { return make_min_text_length(d); });
  r.register_component(StageKind::Checker, "ad-keyword-density",
                       [](const StageDescriptor& d, BuildContext&) { return make_ad_keyword_density(d); });
  r.register_component(StageKind::Parser, "template",
                       [](const StageDescriptor& d, BuildContext& ctx) -> std::unique_ptr<Component> {
                         if (!ctx.templates) missing("a template set", d.name);
                         return std::make_unique<TemplateParser>(ctx.templates);
                       });
  r.register_component(StageKind::Extractor, "crf",
                       [](const StageDescriptor& d, BuildContext& ctx) -> std::unique_ptr<Component> {
                         if (!ctx.nlp) missing("NLP resources", d.name);
                         return std::make_unique<CrfExtractor>(ctx.nlp);
                       });
  r.register_component(StageKind::Extractor, "regex", [](const StageDescriptor&, BuildContext&) {
    return std::make_unique<RegexExtractor>();
  });
  r.register_component(StageKind::Connector, "embedded",
                       [](const StageDescriptor& d, BuildContext& ctx) -> std::unique_ptr<Component> {
                         if (!ctx.store) missing("a graph store", d.name);
                         return std::make_unique<EmbeddedConnector>(ctx.store);
                       });
}

}  // namespace skg::pipeline
