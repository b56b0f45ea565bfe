#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace skg::query {

struct Predicate {
  std::string attribute;  // "name", "type", "id" or an attribute key
  std::string literal;    // non-empty
  bool operator==(const Predicate&) const = default;
};

/// match ( var ) [where var . attribute = "literal"] return var
struct QueryAst {
  std::string variable;
  std::optional<Predicate> predicate;
  bool operator==(const QueryAst&) const = default;
};

/// Keywords are case-insensitive; strings take single or double quotes with
/// backslash escapes. Throws SyntaxError (offset = character position, the
/// message lists line:column and the expected tokens) or UnboundVariable.
QueryAst parse_query(std::string_view text);

/// Canonical text form; parse_query(print_query(ast)) == ast.
std::string print_query(const QueryAst& ast);

struct LineCol {
  std::size_t line = 1;
  std::size_t column = 1;
};
LineCol line_col(std::string_view text, std::size_t offset);

}  // namespace skg::query
