#pragma once

#include <string_view>

#include <nlohmann/json.hpp>

namespace skg::pipeline {

/// Parses the TOML subset used by configuration files into a JSON tree:
///  - `key = value` with bare, quoted or dotted keys;
///  - `[table]` and `[[array.of.tables]]` headers (dotted);
///  - values: basic "..." and literal '...' strings, integers, floats,
///    booleans, arrays (may span lines, trailing comma allowed) and inline
///    tables;
///  - `#` comments.
/// Dates, multi-line strings and redefinition checks beyond duplicate keys
/// are not supported. Throws ValidationError with "line:col" on bad input.
nlohmann::json parse_toml(std::string_view text);

/// Parses a single value as it would appear on the right of `=`. Text that
/// is not a valid value is returned as a string.
nlohmann::json parse_toml_value_lenient(std::string_view text);

}  // namespace skg::pipeline
