#include "skg/parsers/selector.hpp"

#include <cctype>
#include <functional>
#include <set>

#include <fmt/format.h>

#include "skg/core/error.hpp"
#include "skg/core/text.hpp"

namespace skg::parsers {

namespace {

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
}

class SelectorParser {
 public:
  explicit SelectorParser(std::string_view text) : s_(text) {}

  std::vector<Selector::Complex> parse() {
    std::vector<Selector::Complex> out;
    while (true) {
      skip_ws();
      out.push_back(complex());
      skip_ws();
      if (pos_ >= s_.size()) break;
      if (s_[pos_] != ',') fail("expected ',' or end of selector");
      ++pos_;
    }
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& what) {
    throw Error(ErrorCode::BuildError,
                fmt::format("invalid selector '{}': {} at column {}", s_, what, pos_ + 1), pos_);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  std::string ident() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
    if (start == pos_) fail("expected identifier");
    return std::string(s_.substr(start, pos_ - start));
  }

  Selector::Complex complex() {
    Selector::Complex steps;
    bool child = false;
    while (true) {
      Selector::Step step;
      step.child_of_previous = child;
      step.compound = compound();
      steps.push_back(std::move(step));
      std::size_t before = pos_;
      skip_ws();
      if (pos_ >= s_.size() || s_[pos_] == ',') return steps;
      if (s_[pos_] == '>') {
        ++pos_;
        skip_ws();
        child = true;
      } else if (pos_ > before) {
        child = false;
      } else {
        fail("unexpected character");
      }
    }
  }

  Selector::Compound compound() {
    Selector::Compound c;
    bool any = false;
    if (pos_ < s_.size() && s_[pos_] == '*') {
      ++pos_;
      any = true;
    } else if (pos_ < s_.size() && ident_char(s_[pos_])) {
      c.tag = to_lower_ascii(ident());
      any = true;
    }
    while (pos_ < s_.size()) {
      char ch = s_[pos_];
      if (ch == '#') {
        ++pos_;
        c.id = ident();
      } else if (ch == '.') {
        ++pos_;
        c.classes.push_back(ident());
      } else if (ch == '[') {
        ++pos_;
        skip_ws();
        Selector::AttrTest test;
        test.name = to_lower_ascii(ident());
        skip_ws();
        if (pos_ >= s_.size()) fail("unterminated attribute test");
        if (s_[pos_] != ']') {
          if (s_[pos_] == '=') {
            test.op = "=";
            ++pos_;
          } else if (pos_ + 1 < s_.size() && s_[pos_ + 1] == '=' &&
                     std::string_view("~^$*").find(s_[pos_]) != std::string_view::npos) {
            test.op = std::string(s_.substr(pos_, 2));
            pos_ += 2;
          } else {
            fail("expected attribute operator");
          }
          skip_ws();
          if (pos_ < s_.size() && (s_[pos_] == '"' || s_[pos_] == '\'')) {
            char q = s_[pos_++];
            auto end = s_.find(q, pos_);
            if (end == std::string_view::npos) fail("unterminated string");
            test.value = std::string(s_.substr(pos_, end - pos_));
            pos_ = end + 1;
          } else {
            test.value = ident();
          }
          skip_ws();
        }
        if (pos_ >= s_.size() || s_[pos_] != ']') fail("expected ']'");
        ++pos_;
        c.attrs.push_back(std::move(test));
      } else {
        break;
      }
      any = true;
    }
    if (!any) fail("empty compound selector");
    return c;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

bool match_compound(const Selector::Compound& c, const HtmlNode& node) {
  if (!node.is_element() || node.tag == "#document") return false;
  if (!c.tag.empty() && c.tag != node.tag) return false;
  if (!c.id.empty() && node.attr("id") != c.id) return false;
  for (const auto& cls : c.classes) {
    if (!node.has_class(cls)) return false;
  }
  for (const auto& t : c.attrs) {
    auto it = node.attrs.find(t.name);
    if (it == node.attrs.end()) return false;
    const std::string& v = it->second;
    if (t.op.empty()) continue;
    if (t.op == "=" && v != t.value) return false;
    if (t.op == "^=" && v.rfind(t.value, 0) != 0) return false;
    if (t.op == "$=" && (v.size() < t.value.size() ||
                         v.compare(v.size() - t.value.size(), t.value.size(), t.value) != 0))
      return false;
    if (t.op == "*=" && v.find(t.value) == std::string::npos) return false;
    if (t.op == "~=") {
      HtmlNode probe;
      probe.attrs["class"] = v;
      if (!probe.has_class(t.value)) return false;
    }
  }
  return true;
}

bool match_complex(const Selector::Complex& steps, std::size_t idx, const HtmlNode& node) {
  if (!match_compound(steps[idx].compound, node)) return false;
  if (idx == 0) return true;
  if (steps[idx].child_of_previous) {
    return node.parent != nullptr && match_complex(steps, idx - 1, *node.parent);
  }
  for (const HtmlNode* a = node.parent; a != nullptr; a = a->parent) {
    if (match_complex(steps, idx - 1, *a)) return true;
  }
  return false;
}

}  // namespace

Selector Selector::compile(std::string_view text) {
  Selector sel;
  sel.text_ = std::string(trim(text));
  if (sel.text_.empty()) {
    throw Error(ErrorCode::BuildError, "invalid selector: empty", 0);
  }
  sel.alternatives_ = SelectorParser(sel.text_).parse();
  return sel;
}

bool Selector::matches(const HtmlNode& node) const {
  for (const auto& alt : alternatives_) {
    if (match_complex(alt, alt.size() - 1, node)) return true;
  }
  return false;
}

std::vector<const HtmlNode*> Selector::select(const HtmlNode& root) const {
  std::vector<const HtmlNode*> out;
  std::function<void(const HtmlNode&)> walk = [&](const HtmlNode& n) {
    if (matches(n)) out.push_back(&n);
    for (const auto& c : n.children) {
      if (c->is_element()) walk(*c);
    }
  };
  walk(root);
  return out;
}

}  // namespace skg::parsers
