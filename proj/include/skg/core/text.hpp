#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "skg/core/types.hpp"

namespace skg {

/// Canonical node key: trimmed, whitespace runs collapsed to one space,
/// ASCII-lowercased unless the type is case-sensitive (FilePath, Registry).
/// Throws EmptyDescription on blank input.
std::string normalize_description(std::string_view text, EntityType etype);

std::string to_lower_ascii(std::string_view s);
std::string to_upper_ascii(std::string_view s);
std::string_view trim(std::string_view s);
std::string collapse_whitespace(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
bool starts_with_icase(std::string_view s, std::string_view prefix);
bool iequals(std::string_view a, std::string_view b);

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);
std::uint32_t crc32(std::string_view bytes);

}  // namespace skg
