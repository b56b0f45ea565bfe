#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skg/core/types.hpp"

namespace skg::nlp {

/// Neutral word that stands in for every protected IOC.
inline constexpr std::string_view kSurrogateWord = "something";

struct ProtectedSpan {
  CharSpan surrogate;
  CharSpan original;
  std::string surface;    // raw text as it appears in the original
  std::string canonical;  // refanged form
  EntityType ioc_type = EntityType::Domain;

  bool operator==(const ProtectedSpan&) const = default;
};

struct ProtectedText {
  std::string surrogate_text;
  std::vector<ProtectedSpan> span_map;

  /// Maps an offset in surrogate_text that is not inside a surrogate to
  /// the corresponding offset in the original text.
  std::size_t to_original(std::size_t surrogate_offset) const;
};

/// Reverses defanging: hxxp(s) → http(s), [.] / (.) / [dot] → ".",
/// [:] → ":", [@] / [at] → "@", [/] → "/".
std::string refang(std::string_view text);

/// Classifies a whitespace-free candidate (already refanged). Precedence,
/// first match wins: URL, Email, Registry, FilePath, SHA256, SHA1, MD5, IP,
/// FileName, Domain. The known-extension table therefore beats the TLD
/// table for names like "update.exe".
std::optional<EntityType> classify_ioc(std::string_view candidate);

/// Replaces every maximal IOC substring with the surrogate word and records
/// where each one came from. Restoring the span map reproduces `text`.
ProtectedText protect_iocs(std::string_view text);

/// Rebuilds the original text by substituting surfaces back in, using span
/// positions only.
std::string restore(const ProtectedText& pt);

}  // namespace skg::nlp
