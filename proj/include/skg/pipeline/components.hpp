#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "skg/core/types.hpp"
#include "skg/ingest/source.hpp"
#include "skg/kgraph/ontology.hpp"
#include "skg/pipeline/config.hpp"

namespace skg::kgraph {
class GraphStore;
}
namespace skg::nlp {
struct ExtractorResources;
}
namespace skg::parsers {
class TemplateSet;
}

namespace skg::pipeline {

struct ItemError {
  std::string item;  // report id or origin locator
  StageKind stage = StageKind::Porter;
  std::string code;
  std::string message;
};

class Component {
 public:
  virtual ~Component() = default;
};

/// Groups fetched pages into reports.
class Porter : public Component {
 public:
  virtual std::vector<ReportDoc> port(std::vector<ingest::FetchedItem> items, std::vector<ItemError>& errors) = 0;
};

/// Returns the name of the rule that rejects `doc`, or nullopt to pass it.
/// Must not modify the document. Non-sequential checkers are called from
/// several threads at once.
class Checker : public Component {
 public:
  virtual std::optional<std::string> check(const ReportDoc& doc) = 0;
  /// Sequential checkers see documents one at a time in porter order.
  virtual bool sequential() const { return false; }
};

class Parser : public Component {
 public:
  virtual CtiRecord parse(const ReportDoc& doc) = 0;
};

class Extractor : public Component {
 public:
  virtual void extract(CtiRecord& rec) = 0;
};

/// Called from a single writer thread.
class Connector : public Component {
 public:
  virtual kgraph::MergeDelta connect(const CtiRecord& rec) = 0;
};

/// Shared state handed to component factories.
struct BuildContext {
  const AppConfig* config = nullptr;
  kgraph::GraphStore* store = nullptr;
  std::shared_ptr<const nlp::ExtractorResources> nlp;
  std::shared_ptr<const parsers::TemplateSet> templates;
};

using Factory = std::function<std::unique_ptr<Component>(const StageDescriptor&, BuildContext&)>;

class Registry {
 public:
  /// Throws DuplicateName when `name` is already registered for `kind`.
  void register_component(StageKind kind, const std::string& name, Factory factory);
  bool contains(StageKind kind, const std::string& name) const;
  std::vector<std::string> names(StageKind kind) const;

  /// Throws UnknownComponent for unregistered names and BuildError when the
  /// factory fails or returns the wrong interface.
  std::unique_ptr<Component> build(const StageDescriptor& desc, BuildContext& ctx) const;

 private:
  std::map<std::pair<StageKind, std::string>, Factory> factories_;
};

/// Registers the shipped components:
///   Porter grouping; Checker duplicate-content-hash, min-text-length,
///   ad-keyword-density; Parser template; Extractor crf, regex;
///   Connector embedded.
void register_builtin_components(Registry& registry);

/// Report id derived from (source_id, origin_locator, content_hash).
std::string make_report_id(const std::string& source_id, const std::string& origin_locator,
                           const std::string& content_hash);

}  // namespace skg::pipeline
