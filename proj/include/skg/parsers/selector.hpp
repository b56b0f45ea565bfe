#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "skg/parsers/html.hpp"

namespace skg::parsers {

/// Compiled CSS selector group. Supported grammar:
///   group    := complex ("," complex)*
///   complex  := compound ((" " | ">") compound)*
///   compound := (tag | "*")? ("#" id | "." class | "[" attr (op value)? "]")*
///   op       := "=" | "~=" | "^=" | "$=" | "*="
/// Values may be quoted. Pseudo-classes and XPath are not supported.
class Selector {
 public:
  /// Throws BuildError with the offending position on invalid syntax.
  static Selector compile(std::string_view text);

  const std::string& text() const { return text_; }

  /// Matching elements in document order, without duplicates.
  std::vector<const HtmlNode*> select(const HtmlNode& root) const;
  bool matches(const HtmlNode& node) const;

  struct AttrTest {
    std::string name;
    std::string op;
    std::string value;
  };
  struct Compound {
    std::string tag;  // empty = any
    std::string id;
    std::vector<std::string> classes;
    std::vector<AttrTest> attrs;
  };
  struct Step {
    Compound compound;
    bool child_of_previous = false;  // '>' combinator
  };
  using Complex = std::vector<Step>;

 private:
  std::string text_;
  std::vector<Complex> alternatives_;
};

}  // namespace skg::parsers
