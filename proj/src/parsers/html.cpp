#include "skg/parsers/html.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "skg/core/text.hpp"

namespace skg::parsers {

namespace {

constexpr std::array<std::string_view, 14> kVoidTags = {
    "area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "param",
    "source", "track", "wbr"};

constexpr std::array<std::string_view, 4> kRawTextTags = {"script", "style", "textarea", "xmp"};

constexpr std::array<std::string_view, 7> kHiddenTags = {"script", "style",  "noscript", "template",
                                                         "head",   "title", "meta"};

constexpr std::array<std::string_view, 36> kBlockTags = {
    "address", "article", "aside", "blockquote", "body",   "br",    "dd",     "details",
    "div",     "dl",      "dt",    "fieldset",   "figcaption", "figure", "footer", "form",
    "h1",      "h2",      "h3",    "h4",         "h5",     "h6",    "header", "hr",
    "li",      "main",    "nav",   "ol",         "p",      "pre",   "section", "table",
    "tr",      "ul",      "html",  "item"};

template <std::size_t N>
bool contains(const std::array<std::string_view, N>& set, std::string_view tag) {
  return std::find(set.begin(), set.end(), tag) != set.end();
}

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':' ||
         c == '.';
}

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }

void append_utf8(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x110000) {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

class TreeBuilder {
 public:
  explicit TreeBuilder(std::string_view src) : src_(src) {
    root_ = std::make_unique<HtmlNode>();
    root_->tag = "#document";
    stack_.push_back(root_.get());
  }

  std::unique_ptr<HtmlNode> build() {
    while (pos_ < src_.size()) {
      if (src_[pos_] == '<') {
        if (src_.compare(pos_, 4, "<!--") == 0) {
          auto end = src_.find("-->", pos_ + 4);
          pos_ = end == std::string_view::npos ? src_.size() : end + 3;
        } else if (src_.compare(pos_, 9, "<![CDATA[") == 0) {
          auto end = src_.find("]]>", pos_ + 9);
          auto stop = end == std::string_view::npos ? src_.size() : end;
          add_text(std::string(src_.substr(pos_ + 9, stop - pos_ - 9)), false);
          pos_ = end == std::string_view::npos ? src_.size() : end + 3;
        } else if (pos_ + 1 < src_.size() && (src_[pos_ + 1] == '!' || src_[pos_ + 1] == '?')) {
          auto end = src_.find('>', pos_);
          pos_ = end == std::string_view::npos ? src_.size() : end + 1;
        } else if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
          end_tag();
        } else if (pos_ + 1 < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_ + 1]))) {
          start_tag();
        } else {
          add_text("<", false);
          ++pos_;
        }
      } else {
        auto end = src_.find('<', pos_);
        if (end == std::string_view::npos) end = src_.size();
        add_text(std::string(src_.substr(pos_, end - pos_)), true);
        pos_ = end;
      }
    }
    return std::move(root_);
  }

 private:
  HtmlNode* top() { return stack_.back(); }

  void add_text(std::string text, bool decode) {
    if (text.empty()) return;
    if (decode) text = decode_entities(text);
    HtmlNode* parent = top();
    if (!parent->children.empty() && parent->children.back()->is_text()) {
      parent->children.back()->text += text;
      return;
    }
    auto node = std::make_unique<HtmlNode>();
    node->text = std::move(text);
    node->parent = parent;
    parent->children.push_back(std::move(node));
  }

  std::string read_name() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && is_name_char(src_[pos_])) ++pos_;
    return to_lower_ascii(src_.substr(start, pos_ - start));
  }

  void skip_ws() {
    while (pos_ < src_.size() && is_ws(src_[pos_])) ++pos_;
  }

  void end_tag() {
    pos_ += 2;
    std::string name = read_name();
    auto close = src_.find('>', pos_);
    pos_ = close == std::string_view::npos ? src_.size() : close + 1;
    for (std::size_t i = stack_.size(); i-- > 1;) {
      if (stack_[i]->tag == name) {
        stack_.resize(i);
        return;
      }
    }
  }

  // Pops an open `tag` element if one exists above the nearest `boundary`.
  void implicit_close(std::string_view tag, std::initializer_list<std::string_view> boundary) {
    for (std::size_t i = stack_.size(); i-- > 1;) {
      const auto& t = stack_[i]->tag;
      if (t == tag) {
        stack_.resize(i);
        return;
      }
      if (std::find(boundary.begin(), boundary.end(), t) != boundary.end()) return;
    }
  }

  void start_tag() {
    ++pos_;
    auto node = std::make_unique<HtmlNode>();
    node->tag = read_name();
    bool self_closing = false;
    while (pos_ < src_.size()) {
      skip_ws();
      if (pos_ >= src_.size()) break;
      char c = src_[pos_];
      if (c == '>') {
        ++pos_;
        break;
      }
      if (c == '/') {
        self_closing = pos_ + 1 < src_.size() && src_[pos_ + 1] == '>';
        ++pos_;
        continue;
      }
      std::size_t name_start = pos_;
      while (pos_ < src_.size() && !is_ws(src_[pos_]) && src_[pos_] != '=' && src_[pos_] != '>' &&
             src_[pos_] != '/')
        ++pos_;
      std::string attr = to_lower_ascii(src_.substr(name_start, pos_ - name_start));
      if (attr.empty()) {
        ++pos_;
        continue;
      }
      skip_ws();
      std::string value;
      if (pos_ < src_.size() && src_[pos_] == '=') {
        ++pos_;
        skip_ws();
        if (pos_ < src_.size() && (src_[pos_] == '"' || src_[pos_] == '\'')) {
          char q = src_[pos_++];
          auto end = src_.find(q, pos_);
          if (end == std::string_view::npos) end = src_.size();
          value = decode_entities(src_.substr(pos_, end - pos_));
          pos_ = std::min(end + 1, src_.size());
        } else {
          std::size_t vs = pos_;
          while (pos_ < src_.size() && !is_ws(src_[pos_]) && src_[pos_] != '>') ++pos_;
          value = decode_entities(src_.substr(vs, pos_ - vs));
        }
      }
      node->attrs.emplace(std::move(attr), std::move(value));
    }

    const std::string tag = node->tag;
    if (tag == "p" || is_block_element(tag)) implicit_close("p", {"div", "td", "th", "li", "section", "article", "body", "blockquote"});
    if (tag == "li") implicit_close("li", {"ul", "ol"});
    if (tag == "tr") implicit_close("tr", {"table", "tbody", "thead"});
    if (tag == "td" || tag == "th") {
      implicit_close("td", {"tr", "table"});
      implicit_close("th", {"tr", "table"});
    }
    if (tag == "dt" || tag == "dd") {
      implicit_close("dt", {"dl"});
      implicit_close("dd", {"dl"});
    }

    HtmlNode* parent = top();
    node->parent = parent;
    HtmlNode* raw = node.get();
    parent->children.push_back(std::move(node));

    if (contains(kRawTextTags, tag)) {
      std::size_t end = pos_;
      while (true) {
        end = src_.find("</", end);
        if (end == std::string_view::npos) {
          end = src_.size();
          break;
        }
        if (starts_with_icase(src_.substr(end + 2), tag)) break;
        end += 2;
      }
      if (end > pos_) {
        auto text = std::make_unique<HtmlNode>();
        text->text = std::string(src_.substr(pos_, end - pos_));
        text->parent = raw;
        raw->children.push_back(std::move(text));
      }
      pos_ = end;
      if (pos_ < src_.size()) {
        auto close = src_.find('>', pos_);
        pos_ = close == std::string_view::npos ? src_.size() : close + 1;
      }
      return;
    }
    if (!self_closing && !contains(kVoidTags, tag)) stack_.push_back(raw);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::unique_ptr<HtmlNode> root_;
  std::vector<HtmlNode*> stack_;
};

void collect_text(const HtmlNode& node, std::string& out) {
  if (node.is_text()) {
    out += node.text;
    return;
  }
  if (contains(kHiddenTags, node.tag)) return;
  const bool block = is_block_element(node.tag);
  if (block) out.push_back('\n');
  for (const auto& child : node.children) collect_text(*child, out);
  if (node.tag == "td" || node.tag == "th") out.push_back(' ');
  if (block) out.push_back('\n');
}

}  // namespace

std::string HtmlNode::attr(const std::string& name) const {
  auto it = attrs.find(name);
  return it == attrs.end() ? std::string() : it->second;
}

bool HtmlNode::has_class(std::string_view cls) const {
  auto it = attrs.find("class");
  if (it == attrs.end()) return false;
  std::string_view classes = it->second;
  std::size_t i = 0;
  while (i < classes.size()) {
    while (i < classes.size() && is_ws(classes[i])) ++i;
    std::size_t start = i;
    while (i < classes.size() && !is_ws(classes[i])) ++i;
    if (classes.substr(start, i - start) == cls) return true;
  }
  return false;
}

std::vector<const HtmlNode*> HtmlNode::element_children() const {
  std::vector<const HtmlNode*> out;
  for (const auto& c : children) {
    if (c->is_element()) out.push_back(c.get());
  }
  return out;
}

std::unique_ptr<HtmlNode> parse_html(std::string_view markup) { return TreeBuilder(markup).build(); }

std::string decode_entities(std::string_view text) {
  static const std::map<std::string, unsigned long, std::less<>> kNamed = {
      {"amp", '&'},     {"lt", '<'},      {"gt", '>'},      {"quot", '"'},   {"apos", '\''},
      {"nbsp", 0xA0},   {"ndash", 0x2013}, {"mdash", 0x2014}, {"hellip", 0x2026}, {"copy", 0xA9},
      {"reg", 0xAE},    {"rsquo", 0x2019}, {"lsquo", 0x2018}, {"rdquo", 0x201D}, {"ldquo", 0x201C},
  };
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '&') {
      out.push_back(text[i]);
      continue;
    }
    auto semi = text.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back('&');
      continue;
    }
    std::string_view name = text.substr(i + 1, semi - i - 1);
    unsigned long cp = 0;
    bool ok = false;
    if (!name.empty() && name[0] == '#') {
      try {
        if (name.size() > 1 && (name[1] == 'x' || name[1] == 'X')) {
          cp = std::stoul(std::string(name.substr(2)), nullptr, 16);
        } else {
          cp = std::stoul(std::string(name.substr(1)), nullptr, 10);
        }
        ok = true;
      } catch (const std::exception&) {
        ok = false;
      }
    } else if (auto it = kNamed.find(name); it != kNamed.end()) {
      cp = it->second;
      ok = true;
    }
    if (!ok) {
      out.push_back('&');
      continue;
    }
    // Non-breaking space becomes a plain space so whitespace rules apply.
    if (cp == 0xA0) cp = ' ';
    append_utf8(out, cp);
    i = semi;
  }
  return out;
}

bool is_block_element(std::string_view tag) { return contains(kBlockTags, tag); }

std::string normalize_plain_text(std::string_view text) {
  std::string out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line = collapse_whitespace(text.substr(start, end - start));
    if (!line.empty()) {
      if (!out.empty()) out.push_back('\n');
      out += line;
    }
    start = end + 1;
  }
  return out;
}

std::string visible_text(const HtmlNode& node) {
  std::string raw;
  if (node.is_text()) {
    raw = node.text;
  } else {
    for (const auto& child : node.children) collect_text(*child, raw);
    if (node.tag == "td" || node.tag == "th") raw.push_back(' ');
  }
  return normalize_plain_text(raw);
}

}  // namespace skg::parsers
