#include "skg/parsers/parser.hpp"

#include <algorithm>
#include <functional>

#include <zlib.h>

#include "skg/core/error.hpp"
#include "skg/core/text.hpp"
#include "skg/parsers/html.hpp"

namespace skg::parsers {

namespace {

bool is_html(const std::string& content_type) {
  return content_type.find("html") != std::string::npos || content_type.find("xml") != std::string::npos;
}

bool is_pdf(const std::string& content_type) { return content_type.find("pdf") != std::string::npos; }

bool is_descendant(const HtmlNode* node, const HtmlNode* ancestor) {
  for (const HtmlNode* p = node->parent; p != nullptr; p = p->parent) {
    if (p == ancestor) return true;
  }
  return false;
}

void push_unique(std::vector<std::string>& values, std::string v) {
  if (v.empty()) return;
  if (std::find(values.begin(), values.end(), v) == values.end()) values.push_back(std::move(v));
}

std::string one_line(const std::string& text) { return collapse_whitespace(text); }

std::vector<std::string> field_values(const FieldRule& rule, const HtmlNode& root) {
  std::vector<std::string> values;
  auto matches = rule.selector.select(root);
  switch (rule.kind) {
    case FieldValueKind::Text:
      for (const auto* m : matches) {
        std::string v = one_line(visible_text(*m));
        if (!v.empty()) {
          values.push_back(std::move(v));
          break;
        }
      }
      break;
    case FieldValueKind::List: {
      static const Selector li = Selector::compile("li");
      for (const auto* m : matches) {
        auto items = li.select(*m);
        if (items.empty()) {
          push_unique(values, one_line(visible_text(*m)));
        } else {
          for (const auto* item : items) push_unique(values, one_line(visible_text(*item)));
        }
      }
      break;
    }
    case FieldValueKind::TableKv: {
      static const Selector rows = Selector::compile("tr");
      static const Selector cells = Selector::compile("td, th");
      static const Selector terms = Selector::compile("dt");
      for (const auto* m : matches) {
        for (const auto* row : rows.select(*m)) {
          auto cs = cells.select(*row);
          if (cs.size() < 2) continue;
          std::string key = one_line(visible_text(*cs[0]));
          std::string val;
          for (std::size_t i = 1; i < cs.size(); ++i) {
            if (!val.empty()) val.push_back(' ');
            val += one_line(visible_text(*cs[i]));
          }
          if (!key.empty() && !val.empty()) push_unique(values, key + ": " + val);
        }
        for (const auto* dt : terms.select(*m)) {
          const HtmlNode* parent = dt->parent;
          auto siblings = parent->element_children();
          auto it = std::find(siblings.begin(), siblings.end(), dt);
          if (it != siblings.end() && std::next(it) != siblings.end() && (*std::next(it))->tag == "dd") {
            std::string key = one_line(visible_text(*dt));
            std::string val = one_line(visible_text(**std::next(it)));
            if (!key.empty() && !val.empty()) push_unique(values, key + ": " + val);
          }
        }
      }
      break;
    }
  }
  return values;
}

std::string body_from_selectors(const std::vector<Selector>& selectors, const HtmlNode& root) {
  std::vector<const HtmlNode*> chosen;
  for (const auto& sel : selectors) {
    for (const auto* m : sel.select(root)) {
      bool covered = std::any_of(chosen.begin(), chosen.end(), [&](const HtmlNode* c) {
        return c == m || is_descendant(m, c);
      });
      if (!covered) chosen.push_back(m);
    }
  }
  std::string body;
  for (const auto* m : chosen) {
    std::string t = visible_text(*m);
    if (t.empty()) continue;
    if (!body.empty()) body.push_back('\n');
    body += t;
  }
  return body;
}

std::string inflate(std::string_view data) {
  std::string out;
  z_stream zs{};
  if (inflateInit(&zs) != Z_OK) return out;
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  char buf[16384];
  int rc = Z_OK;
  while (rc == Z_OK) {
    zs.next_out = reinterpret_cast<Bytef*>(buf);
    zs.avail_out = sizeof(buf);
    rc = ::inflate(&zs, Z_NO_FLUSH);
    out.append(buf, sizeof(buf) - zs.avail_out);
  }
  inflateEnd(&zs);
  return out;
}

// Extracts text operands of Tj / TJ / ' / " operators from a content stream.
void content_stream_text(std::string_view s, std::string& out) {
  std::string pending;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '(') {
      int depth = 1;
      std::string lit;
      ++i;
      for (; i < s.size() && depth > 0; ++i) {
        char d = s[i];
        if (d == '\\' && i + 1 < s.size()) {
          char e = s[++i];
          switch (e) {
            case 'n': lit.push_back('\n'); break;
            case 'r': lit.push_back('\r'); break;
            case 't': lit.push_back('\t'); break;
            case '(': lit.push_back('('); break;
            case ')': lit.push_back(')'); break;
            case '\\': lit.push_back('\\'); break;
            default:
              if (e >= '0' && e <= '7') {
                int v = e - '0';
                for (int k = 0; k < 2 && i + 1 < s.size() && s[i + 1] >= '0' && s[i + 1] <= '7'; ++k) {
                  v = v * 8 + (s[++i] - '0');
                }
                lit.push_back(static_cast<char>(v));
              }
          }
          continue;
        }
        if (d == '(') ++depth;
        if (d == ')' && --depth == 0) break;
        lit.push_back(d);
      }
      pending += lit;
    } else if (c == 'T' && i + 1 < s.size() && (s[i + 1] == 'j' || s[i + 1] == 'J')) {
      out += pending;
      pending.clear();
      ++i;
    } else if (c == 'T' && i + 1 < s.size() && (s[i + 1] == '*' || s[i + 1] == 'd' || s[i + 1] == 'D')) {
      out.push_back('\n');
      ++i;
    } else if (c == 'E' && i + 1 < s.size() && s[i + 1] == 'T') {
      out.push_back('\n');
      ++i;
    } else if (c == '\'' || c == '"') {
      out.push_back('\n');
      out += pending;
      pending.clear();
    }
  }
}

}  // namespace

std::string pdf_text(std::string_view bytes) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    auto s = bytes.find("stream", pos);
    if (s == std::string_view::npos) break;
    if (s >= 3 && bytes.substr(s - 3, 3) == "end") {
      pos = s + 6;
      continue;
    }
    auto dict_start = bytes.rfind("<<", s);
    bool flate = dict_start != std::string_view::npos &&
                 bytes.substr(dict_start, s - dict_start).find("FlateDecode") != std::string_view::npos;
    std::size_t data_start = s + 6;
    if (data_start < bytes.size() && bytes[data_start] == '\r') ++data_start;
    if (data_start < bytes.size() && bytes[data_start] == '\n') ++data_start;
    auto e = bytes.find("endstream", data_start);
    if (e == std::string_view::npos) break;
    auto data = bytes.substr(data_start, e - data_start);
    if (flate) {
      content_stream_text(inflate(data), out);
    } else {
      content_stream_text(data, out);
    }
    out.push_back('\n');
    pos = e + 9;
  }
  return normalize_plain_text(out);
}

std::string payload_text(const Payload& payload) {
  if (is_html(payload.content_type)) {
    auto root = parse_html(payload.bytes);
    return visible_text(*root);
  }
  if (is_pdf(payload.content_type)) return pdf_text(payload.bytes);
  return normalize_plain_text(payload.bytes);
}

const SourceTemplate& detect_source(const ReportDoc& doc, const TemplateSet& templates) {
  for (const auto& t : templates.templates()) {
    if (t.source_id == doc.source_id) return t;
  }
  return generic_template();
}

CtiRecord parse(const ReportDoc& doc, const SourceTemplate& tmpl) {
  CtiRecord rec;
  rec.report_id = doc.report_id;
  rec.source_id = doc.source_id;
  rec.vendor = tmpl.vendor;
  if (!tmpl.is_generic() && tmpl.source_id != doc.source_id) {
    throw Error(ErrorCode::TemplateMismatch,
                "template '" + tmpl.source_id + "' applied to source '" + doc.source_id + "'");
  }

  std::string title;
  std::vector<std::string> bodies(doc.raw_payloads.size());
  std::vector<bool> selector_rule_fired(tmpl.kind_rules.size(), false);
  bool any_title_match = false;
  std::vector<std::unique_ptr<HtmlNode>> trees(doc.raw_payloads.size());

  for (std::size_t i = 0; i < doc.raw_payloads.size(); ++i) {
    const auto& payload = doc.raw_payloads[i];
    if (!is_html(payload.content_type)) {
      bodies[i] = payload_text(payload);
      continue;
    }
    trees[i] = parse_html(payload.bytes);
    for (const auto* t : tmpl.title_selector.select(*trees[i])) {
      std::string v = collapse_whitespace(visible_text(*t));
      if (!v.empty()) {
        any_title_match = true;
        if (title.empty()) title = v;
        break;
      }
    }
  }

  for (std::size_t i = 0; i < trees.size(); ++i) {
    const auto& root = trees[i];
    if (!root) continue;
    bodies[i] = body_from_selectors(tmpl.body_selectors, *root);
    if (bodies[i].empty()) {
      bodies[i] = visible_text(*root);
      rec.log("parser", "body selectors matched nothing on page " + std::to_string(i + 1) +
                            "; using whole-page text");
    }
    if (any_title_match) {
      for (const auto& rule : tmpl.field_rules) {
        for (auto& v : field_values(rule, *root)) push_unique(rec.structured_fields[rule.field], std::move(v));
      }
    }
    for (std::size_t k = 0; k < tmpl.kind_rules.size(); ++k) {
      const auto& kr = tmpl.kind_rules[k];
      if (kr.selector && !kr.selector->select(*root).empty()) selector_rule_fired[k] = true;
    }
  }
  for (auto it = rec.structured_fields.begin(); it != rec.structured_fields.end();) {
    it = it->second.empty() ? rec.structured_fields.erase(it) : std::next(it);
  }

  for (const auto& b : bodies) {
    if (b.empty()) continue;
    if (!rec.body_text.empty()) rec.body_text.push_back('\n');
    rec.body_text += b;
  }

  if (!any_title_match) {
    rec.log("parser", "TemplateMismatch: title selector '" + tmpl.title_selector.text() +
                          "' matched nothing; body-only extraction");
    title = doc.title;
    if (title.empty()) {
      auto nl = rec.body_text.find('\n');
      title = rec.body_text.substr(0, nl);
    }
    if (title.empty()) title = doc.report_id;
  }
  rec.title = title;

  std::optional<ReportKind> kind;
  const std::string haystack = to_lower_ascii(rec.title + "\n" + rec.body_text);
  for (std::size_t k = 0; k < tmpl.kind_rules.size() && !kind; ++k) {
    const auto& kr = tmpl.kind_rules[k];
    if (selector_rule_fired[k] ||
        (!kr.contains.empty() && haystack.find(to_lower_ascii(kr.contains)) != std::string::npos)) {
      kind = kr.kind;
    }
  }
  if (kind) {
    rec.report_kind = *kind;
  } else {
    rec.report_kind = ReportKind::Attack;
    rec.log("parser", "no report-kind marker matched; defaulting to Attack");
  }
  return rec;
}

}  // namespace skg::parsers
