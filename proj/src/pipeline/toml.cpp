#include "skg/pipeline/toml.hpp"

#include <cctype>
#include <charconv>

#include <fmt/format.h>

#include "skg/core/error.hpp"

namespace skg::pipeline {

namespace {

using nlohmann::json;

class TomlParser {
 public:
  explicit TomlParser(std::string_view s) : s_(s) {}

  json parse_document() {
    json root = json::object();
    json* current = &root;
    while (true) {
      skip_ws_comments_newlines();
      if (eof()) break;
      if (peek() == '[') {
        bool array = peek(1) == '[';
        pos_ += array ? 2 : 1;
        skip_inline_ws();
        auto path = parse_key_path();
        skip_inline_ws();
        expect(']');
        if (array) expect(']');
        end_of_line();
        current = array ? &open_array_table(root, path) : &open_table(root, path);
        continue;
      }
      auto path = parse_key_path();
      skip_inline_ws();
      expect('=');
      skip_inline_ws();
      json value = parse_value();
      assign(*current, path, std::move(value));
      end_of_line();
    }
    return root;
  }

  json parse_single_value() {
    skip_inline_ws();
    json v = parse_value();
    skip_inline_ws();
    if (!eof()) fail("unexpected trailing characters");
    return v;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;

  bool eof() const { return pos_ >= s_.size(); }
  char peek(std::size_t ahead = 0) const { return pos_ + ahead < s_.size() ? s_[pos_ + ahead] : '\0'; }

  [[noreturn]] void fail(const std::string& what) const {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < pos_ && i < s_.size(); ++i) {
      if (s_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorCode::ValidationError, fmt::format("config {}:{}: {}", line, col, what), pos_);
  }

  void expect(char c) {
    if (peek() != c) fail(fmt::format("expected '{}'", c));
    ++pos_;
  }

  void skip_inline_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  void skip_comment() {
    if (peek() == '#') {
      while (!eof() && peek() != '\n') ++pos_;
    }
  }

  void skip_ws_comments_newlines() {
    while (!eof()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        ++pos_;
      } else if (c == '#') {
        skip_comment();
      } else {
        break;
      }
    }
  }

  void end_of_line() {
    skip_inline_ws();
    skip_comment();
    if (peek() == '\r') ++pos_;
    if (eof()) return;
    if (peek() != '\n') fail("expected end of line");
    ++pos_;
  }

  std::string parse_key_part() {
    if (peek() == '"') return parse_basic_string();
    if (peek() == '\'') return parse_literal_string();
    std::size_t start = pos_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) ++pos_;
    if (start == pos_) fail("expected a key");
    return std::string(s_.substr(start, pos_ - start));
  }

  std::vector<std::string> parse_key_path() {
    std::vector<std::string> path{parse_key_part()};
    while (true) {
      skip_inline_ws();
      if (peek() != '.') break;
      ++pos_;
      skip_inline_ws();
      path.push_back(parse_key_part());
    }
    return path;
  }

  std::string parse_basic_string() {
    expect('"');
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      char c = s_[pos_++];
      if (c == '"') break;
      if (c != '\\') {
        out.push_back(c);
        continue;
      }
      char e = s_[pos_++];
      switch (e) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case '\\': out.push_back('\\'); break;
        case '"': out.push_back('"'); break;
        case 'u': {
          if (pos_ + 4 > s_.size()) fail("bad \\u escape");
          unsigned cp = 0;
          auto r = std::from_chars(s_.data() + pos_, s_.data() + pos_ + 4, cp, 16);
          if (r.ptr != s_.data() + pos_ + 4) fail("bad \\u escape");
          pos_ += 4;
          if (cp < 0x80) {
            out.push_back(static_cast<char>(cp));
          } else if (cp < 0x800) {
            out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
          } else {
            out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
            out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
            out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
          }
          break;
        }
        default: --pos_; fail("unsupported escape");
      }
    }
    return out;
  }

  std::string parse_literal_string() {
    expect('\'');
    std::size_t start = pos_;
    while (!eof() && peek() != '\'' && peek() != '\n') ++pos_;
    if (peek() != '\'') fail("unterminated string");
    std::string out(s_.substr(start, pos_ - start));
    ++pos_;
    return out;
  }

  json parse_value() {
    char c = peek();
    if (c == '"') return parse_basic_string();
    if (c == '\'') return parse_literal_string();
    if (c == '[') return parse_array();
    if (c == '{') return parse_inline_table();
    std::size_t start = pos_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '+' || peek() == '-' ||
                      peek() == '.' || peek() == '_')) {
      ++pos_;
    }
    std::string tok(s_.substr(start, pos_ - start));
    if (tok == "true") return true;
    if (tok == "false") return false;
    std::string digits;
    for (char ch : tok) {
      if (ch != '_') digits.push_back(ch);
    }
    if (!digits.empty()) {
      bool is_float = digits.find_first_of(".eE") != std::string::npos || digits == "inf" || digits == "nan";
      const char* b = digits.data() + (digits[0] == '+' ? 1 : 0);
      const char* e = digits.data() + digits.size();
      if (!is_float) {
        std::int64_t v = 0;
        auto r = std::from_chars(b, e, v);
        if (r.ec == std::errc() && r.ptr == e) return v;
      } else {
        try {
          std::size_t used = 0;
          double d = std::stod(std::string(b, e), &used);
          if (used == static_cast<std::size_t>(e - b)) return d;
        } catch (const std::exception&) {
        }
      }
    }
    pos_ = start;
    fail("invalid value");
  }

  json parse_array() {
    expect('[');
    json arr = json::array();
    while (true) {
      skip_ws_comments_newlines();
      if (peek() == ']') {
        ++pos_;
        return arr;
      }
      arr.push_back(parse_value());
      skip_ws_comments_newlines();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      if (peek() == ']') {
        ++pos_;
        return arr;
      }
      fail("expected ',' or ']' in array");
    }
  }

  json parse_inline_table() {
    expect('{');
    json obj = json::object();
    skip_inline_ws();
    if (peek() == '}') {
      ++pos_;
      return obj;
    }
    while (true) {
      skip_inline_ws();
      auto path = parse_key_path();
      skip_inline_ws();
      expect('=');
      skip_inline_ws();
      assign(obj, path, parse_value());
      skip_inline_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      expect('}');
      return obj;
    }
  }

  json& descend(json& node, const std::string& key) {
    json& child = node[key];
    if (child.is_null()) child = json::object();
    if (child.is_array() && !child.empty() && child.back().is_object()) return child.back();
    if (!child.is_object()) fail("key '" + key + "' is not a table");
    return child;
  }

  void assign(json& table, const std::vector<std::string>& path, json value) {
    json* node = &table;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) node = &descend(*node, path[i]);
    if (node->contains(path.back())) fail("duplicate key '" + path.back() + "'");
    (*node)[path.back()] = std::move(value);
  }

  json& open_table(json& root, const std::vector<std::string>& path) {
    json* node = &root;
    for (const auto& k : path) node = &descend(*node, k);
    return *node;
  }

  json& open_array_table(json& root, const std::vector<std::string>& path) {
    json* node = &root;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) node = &descend(*node, path[i]);
    json& arr = (*node)[path.back()];
    if (arr.is_null()) arr = json::array();
    if (!arr.is_array()) fail("key '" + path.back() + "' is not an array of tables");
    arr.push_back(json::object());
    return arr.back();
  }
};

}  // namespace

nlohmann::json parse_toml(std::string_view text) { return TomlParser(text).parse_document(); }

nlohmann::json parse_toml_value_lenient(std::string_view text) {
  try {
    return TomlParser(text).parse_single_value();
  } catch (const Error&) {
    return std::string(text);
  }
}

}  // namespace skg::pipeline
