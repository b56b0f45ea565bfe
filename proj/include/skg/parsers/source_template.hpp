#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "skg/core/types.hpp"
#include "skg/parsers/selector.hpp"

namespace skg::parsers {

enum class FieldValueKind { Text, List, TableKv };

struct FieldRule {
  std::string field;
  Selector selector;
  FieldValueKind kind = FieldValueKind::Text;
};

/// Marker → report kind. A rule fires when its selector matches anything
/// or when `contains` occurs (case-insensitively) in the title or body.
struct KindRule {
  std::optional<Selector> selector;
  std::string contains;
  ReportKind kind = ReportKind::Attack;
};

struct SourceTemplate {
  std::string source_id;
  std::optional<std::string> vendor;
  Selector title_selector;
  std::vector<Selector> body_selectors;
  std::vector<FieldRule> field_rules;
  std::vector<KindRule> kind_rules;
  std::vector<std::string> extension_fields;

  bool is_generic() const;
};

inline constexpr const char* kGenericSourceId = "*generic*";

/// Body-text-only template used when no source-specific one matches.
const SourceTemplate& generic_template();

/// Throws BuildError on invalid selectors, unknown field kinds, or field
/// names outside the starter key set that are not declared as extensions.
SourceTemplate template_from_json(const nlohmann::json& j);

class TemplateSet {
 public:
  TemplateSet() = default;
  explicit TemplateSet(std::vector<SourceTemplate> templates);

  /// Loads every *.json file in `dir` (sorted by filename).
  static TemplateSet load_dir(const std::filesystem::path& dir);

  void add(SourceTemplate t);
  const std::vector<SourceTemplate>& templates() const { return templates_; }

 private:
  std::vector<SourceTemplate> templates_;
};

}  // namespace skg::parsers
