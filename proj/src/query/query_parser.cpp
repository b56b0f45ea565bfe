#include "skg/query/query_parser.hpp"

#include <cctype>
#include <vector>

#include "skg/core/error.hpp"
#include "skg/core/text.hpp"

namespace skg::query {

LineCol line_col(std::string_view text, std::size_t offset) {
  LineCol lc;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++lc.line;
      lc.column = 1;
    } else {
      ++lc.column;
    }
  }
  return lc;
}

namespace {

enum class Tok { Ident, String, LParen, RParen, Dot, Equals, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t pos;
};

std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::Ident: return "'" + t.text + "'";
    case Tok::String: return "string";
    case Tok::LParen: return "'('";
    case Tok::RParen: return "')'";
    case Tok::Dot: return "'.'";
    case Tok::Equals: return "'='";
    case Tok::End: return "end of input";
  }
  return "?";
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) { lex(); }

  QueryAst run() {
    QueryAst ast;
    keyword("match");
    expect(Tok::LParen, "'('");
    ast.variable = ident("variable name").text;
    expect(Tok::RParen, "')'");
    if (is_keyword(peek(), "where")) {
      ++pos_;
      Token var = ident("variable name");
      bind(ast, var);
      expect(Tok::Dot, "'.'");
      Predicate pred;
      pred.attribute = ident("attribute name").text;
      expect(Tok::Equals, "'='");
      Token lit = peek();
      if (lit.kind != Tok::String) fail(lit, "string literal");
      if (lit.text.empty()) fail(lit, "non-empty string literal");
      ++pos_;
      pred.literal = lit.text;
      ast.predicate = std::move(pred);
    } else if (!is_keyword(peek(), "return")) {
      fail(peek(), "'where' or 'return'");
    }
    keyword("return");
    bind(ast, ident("variable name"));
    if (peek().kind != Tok::End) fail(peek(), "end of input");
    return ast;
  }

 private:
  [[noreturn]] void fail(const Token& at, const std::string& expected) const {
    auto lc = line_col(text_, at.pos);
    throw Error(ErrorCode::SyntaxError,
                std::to_string(lc.line) + ":" + std::to_string(lc.column) + ": expected " + expected + ", found " +
                    describe(at),
                at.pos);
  }

  void bind(const QueryAst& ast, const Token& var) const {
    if (var.text != ast.variable) {
      throw Error(ErrorCode::UnboundVariable, "variable '" + var.text + "' is not bound by match", var.pos);
    }
  }

  const Token& peek() const { return toks_[pos_]; }

  static bool is_keyword(const Token& t, std::string_view kw) { return t.kind == Tok::Ident && iequals(t.text, kw); }

  void keyword(std::string_view kw) {
    if (!is_keyword(peek(), kw)) fail(peek(), "'" + std::string(kw) + "'");
    ++pos_;
  }

  void expect(Tok kind, const std::string& what) {
    if (peek().kind != kind) fail(peek(), what);
    ++pos_;
  }

  Token ident(const std::string& what) {
    if (peek().kind != Tok::Ident) fail(peek(), what);
    return toks_[pos_++];
  }

  void lex() {
    std::size_t i = 0;
    while (true) {
      while (i < text_.size() && std::isspace(static_cast<unsigned char>(text_[i]))) ++i;
      if (i >= text_.size()) break;
      char c = text_[i];
      std::size_t start = i;
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        while (i < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[i])) || text_[i] == '_')) ++i;
        toks_.push_back({Tok::Ident, std::string(text_.substr(start, i - start)), start});
      } else if (c == '"' || c == '\'') {
        std::string value;
        ++i;
        bool closed = false;
        while (i < text_.size()) {
          char d = text_[i++];
          if (d == c) {
            closed = true;
            break;
          }
          if (d == '\\' && i < text_.size()) d = text_[i++];
          value.push_back(d);
        }
        if (!closed) fail({Tok::End, "", text_.size()}, std::string("closing ") + c);
        toks_.push_back({Tok::String, std::move(value), start});
      } else {
        Tok kind;
        switch (c) {
          case '(': kind = Tok::LParen; break;
          case ')': kind = Tok::RParen; break;
          case '.': kind = Tok::Dot; break;
          case '=': kind = Tok::Equals; break;
          default: {
            auto lc = line_col(text_, start);
            throw Error(ErrorCode::SyntaxError,
                        std::to_string(lc.line) + ":" + std::to_string(lc.column) + ": unexpected character '" +
                            std::string(1, c) + "'",
                        start);
          }
        }
        ++i;
        toks_.push_back({kind, std::string(1, c), start});
      }
    }
    toks_.push_back({Tok::End, "", text_.size()});
  }

  std::string_view text_;
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

}  // namespace

QueryAst parse_query(std::string_view text) { return Parser(text).run(); }

std::string print_query(const QueryAst& ast) {
  std::string out = "match(" + ast.variable + ")";
  if (ast.predicate) {
    out += " where " + ast.variable + "." + ast.predicate->attribute + " = \"";
    for (char c : ast.predicate->literal) {
      if (c == '"' || c == '\\') out.push_back('\\');
      out.push_back(c);
    }
    out += "\"";
  }
  out += " return " + ast.variable;
  return out;
}

}  // namespace skg::query
