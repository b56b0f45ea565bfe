#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace skg::parsers {

/// Element or text node of a tolerant HTML/XML tree. Text nodes have an
/// empty tag and carry `text`.
struct HtmlNode {
  std::string tag;
  std::map<std::string, std::string> attrs;
  std::string text;
  std::vector<std::unique_ptr<HtmlNode>> children;
  HtmlNode* parent = nullptr;

  bool is_text() const { return tag.empty(); }
  bool is_element() const { return !tag.empty(); }
  std::string attr(const std::string& name) const;
  bool has_class(std::string_view cls) const;
  std::vector<const HtmlNode*> element_children() const;
};

/// Parses markup into a tree rooted at a synthetic "#document" element.
/// Never fails: unknown or unbalanced markup is recovered from.
std::unique_ptr<HtmlNode> parse_html(std::string_view markup);

std::string decode_entities(std::string_view text);

bool is_block_element(std::string_view tag);

/// Visible text of a subtree. Scripts, styles, noscript, templates and
/// comments are dropped. Block elements break lines, inline elements join
/// with spaces; each line is whitespace-collapsed and trimmed and empty
/// lines are removed. Lines are joined with '\n'.
std::string visible_text(const HtmlNode& node);

/// Plain-text normalization applied to non-HTML payloads: the same line
/// rules as visible_text.
std::string normalize_plain_text(std::string_view text);

}  // namespace skg::parsers
