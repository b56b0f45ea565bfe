#include "skg/parsers/source_template.hpp"

#include <algorithm>
#include <fstream>

#include <fmt/format.h>

#include "skg/core/error.hpp"

namespace skg::parsers {

bool SourceTemplate::is_generic() const { return source_id == kGenericSourceId; }

const SourceTemplate& generic_template() {
  static const SourceTemplate t = [] {
    SourceTemplate g{kGenericSourceId, std::nullopt, Selector::compile("title, h1"), {}, {}, {}, {}};
    g.body_selectors.push_back(Selector::compile("body"));
    return g;
  }();
  return t;
}

SourceTemplate template_from_json(const nlohmann::json& j) {
  try {
    SourceTemplate t{j.at("source_id").get<std::string>(), std::nullopt,
                     Selector::compile(j.at("title_selector").get<std::string>()),
                     {}, {}, {}, {}};
    if (t.source_id.empty()) throw Error(ErrorCode::BuildError, "template source_id is empty");
    if (j.contains("vendor") && !j.at("vendor").is_null()) t.vendor = j.at("vendor").get<std::string>();
    for (const auto& s : j.at("body_selectors")) t.body_selectors.push_back(Selector::compile(s.get<std::string>()));
    t.extension_fields = j.value("extension_fields", std::vector<std::string>{});
    const auto& starters = starter_field_keys();
    for (const auto& r : j.value("field_rules", nlohmann::json::array())) {
      std::string field = r.at("field").get<std::string>();
      if (std::find(starters.begin(), starters.end(), field) == starters.end() &&
          std::find(t.extension_fields.begin(), t.extension_fields.end(), field) ==
              t.extension_fields.end()) {
        throw Error(ErrorCode::BuildError,
                    fmt::format("template '{}': field '{}' is neither a starter key nor a declared extension",
                                t.source_id, field));
      }
      std::string kind = r.value("kind", "text");
      FieldValueKind fk;
      if (kind == "text") fk = FieldValueKind::Text;
      else if (kind == "list") fk = FieldValueKind::List;
      else if (kind == "table-kv") fk = FieldValueKind::TableKv;
      else throw Error(ErrorCode::BuildError, fmt::format("template '{}': unknown value kind '{}'", t.source_id, kind));
      t.field_rules.push_back({field, Selector::compile(r.at("selector").get<std::string>()), fk});
    }
    for (const auto& r : j.value("kind_rules", nlohmann::json::array())) {
      KindRule rule;
      auto kind = report_kind_from_string(r.at("kind").get<std::string>());
      if (!kind) {
        throw Error(ErrorCode::BuildError,
                    fmt::format("template '{}': report kind '{}' is not one of Malware, Vulnerability, Attack",
                                t.source_id, r.at("kind").get<std::string>()));
      }
      rule.kind = *kind;
      if (r.contains("selector")) rule.selector = Selector::compile(r.at("selector").get<std::string>());
      rule.contains = r.value("contains", "");
      if (!rule.selector && rule.contains.empty()) {
        throw Error(ErrorCode::BuildError, fmt::format("template '{}': kind rule needs a selector or contains", t.source_id));
      }
      t.kind_rules.push_back(std::move(rule));
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::BuildError, std::string("malformed template: ") + e.what());
  }
}

TemplateSet::TemplateSet(std::vector<SourceTemplate> templates) {
  for (auto& t : templates) add(std::move(t));
}

void TemplateSet::add(SourceTemplate t) {
  for (const auto& existing : templates_) {
    if (existing.source_id == t.source_id) {
      throw Error(ErrorCode::BuildError, fmt::format("two templates share source_id '{}'", t.source_id));
    }
  }
  templates_.push_back(std::move(t));
}

TemplateSet TemplateSet::load_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::BuildError, fmt::format("template directory '{}' does not exist", dir.string()));
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  TemplateSet set;
  for (const auto& f : files) {
    std::ifstream in(f);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::BuildError, fmt::format("{}: {}", f.string(), e.what()));
    }
    set.add(template_from_json(j));
  }
  return set;
}

}  // namespace skg::parsers
