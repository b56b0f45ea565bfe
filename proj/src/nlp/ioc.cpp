#include "skg/nlp/ioc.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <regex>

#include "skg/core/text.hpp"

namespace skg::nlp {

namespace {

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

const std::string kExtensions =
    "exe|dll|sys|bat|cmd|ps1|psm1|vbs|vbe|js|jse|wsf|hta|jar|scr|cpl|ocx|msi|lnk|"
    "doc|docx|docm|xls|xlsx|xlsm|ppt|pptx|rtf|pdf|zip|rar|7z|gz|tar|iso|img|"
    "tmp|dat|bin|log|ini|cfg|txt|py|sh|elf|apk|php|asp|aspx|jsp|dmg|pkg|so|dylib";

const std::string kTlds =
    "com|net|org|info|biz|ru|cn|io|co|uk|de|fr|jp|kr|in|br|su|top|xyz|online|site|club|"
    "me|tv|cc|pw|ws|us|eu|nl|pl|ch|it|es|ir|kp|onion|gov|edu|mil|int|tk|ml|ga|cf|gq|ua|by|kz|"
    "tw|hk|vn|id|sg|my|ca|au|nz|se|no|fi|dk|cz|ro|hu|gr|tr|il|sa|ae|pk|bd|space|live|link|app";

struct Grammars {
  std::regex url{R"(^(?:https?|ftp)://[^\s/?#][^\s]*$)", std::regex::icase};
  std::regex email{R"(^[A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,}$)"};
  std::regex registry{
      R"(^(?:HKEY_LOCAL_MACHINE|HKEY_CURRENT_USER|HKEY_CLASSES_ROOT|HKEY_USERS|HKEY_CURRENT_CONFIG|HKLM|HKCU|HKCR|HKU|HKCC)(?:\\[^\\\s]+)+\\?$)",
      std::regex::icase};
  std::regex win_path{R"(^(?:[A-Za-z]:\\|%[A-Za-z_]+%\\|\\\\[^\\\s]+\\)[^\s]*$)"};
  std::regex unix_path{R"(^/(?:[A-Za-z0-9._-]+/)+[A-Za-z0-9._-]+/?$)"};
  std::regex sha256{R"(^[A-Fa-f0-9]{64}$)"};
  std::regex sha1{R"(^[A-Fa-f0-9]{40}$)"};
  std::regex md5{R"(^[A-Fa-f0-9]{32}$)"};
  std::regex ip{R"(^(\d{1,3})\.(\d{1,3})\.(\d{1,3})\.(\d{1,3})$)"};
  std::regex file_name{"^[A-Za-z0-9_][A-Za-z0-9_.-]*\\.(?:" + kExtensions + ")$", std::regex::icase};
  std::regex domain{"^(?:[A-Za-z0-9](?:[A-Za-z0-9-]{0,61}[A-Za-z0-9])?\\.)+(?:" + kTlds + ")$",
                    std::regex::icase};
};

const Grammars& grammars() {
  static const Grammars g;
  return g;
}

bool is_hex(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isxdigit(static_cast<unsigned char>(c)); });
}

bool worth_classifying(std::string_view core) {
  if (core.find_first_of(".:\\/@%[(") != std::string_view::npos) return true;
  return (core.size() == 32 || core.size() == 40 || core.size() == 64) && is_hex(core);
}

bool unbalanced_close(std::string_view core, char open, char close) {
  auto opens = std::count(core.begin(), core.end(), open);
  auto closes = std::count(core.begin(), core.end(), close);
  return closes > opens;
}

// Strips wrapping punctuation that is not part of an IOC.
std::pair<std::size_t, std::size_t> core_bounds(std::string_view chunk) {
  std::size_t b = 0, e = chunk.size();
  constexpr std::string_view kLead = "(\"'<{[";
  constexpr std::string_view kTrail = ".,;:!?)\"'>}]";
  while (b < e && kLead.find(chunk[b]) != std::string_view::npos) {
    // A leading "[" or "(" belonging to a defang token like "[.]" stays.
    if ((chunk[b] == '[' || chunk[b] == '(') && b + 2 < e && chunk[b + 2] == (chunk[b] == '[' ? ']' : ')')) break;
    ++b;
  }
  while (e > b && kTrail.find(chunk[e - 1]) != std::string_view::npos) {
    std::string_view core = chunk.substr(b, e - b);
    char c = chunk[e - 1];
    if (c == ']' && !unbalanced_close(core, '[', ']')) break;
    if (c == ')' && !unbalanced_close(core, '(', ')')) break;
    --e;
  }
  return {b, e};
}

std::string canonical_form(const std::string& refanged, EntityType type) {
  if (type == EntityType::HashMD5 || type == EntityType::HashSHA1 || type == EntityType::HashSHA256) {
    return to_lower_ascii(refanged);
  }
  return refanged;
}

void replace_all_icase(std::string& s, std::string_view from, std::string_view to) {
  std::string lower = to_lower_ascii(s);
  std::string out;
  std::size_t pos = 0;
  while (true) {
    auto hit = lower.find(from, pos);
    if (hit == std::string::npos) break;
    out.append(s, pos, hit - pos);
    out.append(to);
    pos = hit + from.size();
  }
  out.append(s, pos, std::string::npos);
  s = std::move(out);
}

}  // namespace

std::string refang(std::string_view text) {
  std::string s(text);
  if (starts_with_icase(s, "hxxps://")) s = "https://" + s.substr(8);
  else if (starts_with_icase(s, "hxxp://")) s = "http://" + s.substr(7);
  else if (starts_with_icase(s, "fxp://")) s = "ftp://" + s.substr(6);
  else if (starts_with_icase(s, "https[:]//")) s = "https://" + s.substr(10);
  else if (starts_with_icase(s, "http[:]//")) s = "http://" + s.substr(9);
  else if (starts_with_icase(s, "hxxps[:]//")) s = "https://" + s.substr(10);
  else if (starts_with_icase(s, "hxxp[:]//")) s = "http://" + s.substr(9);
  replace_all_icase(s, "[.]", ".");
  replace_all_icase(s, "(.)", ".");
  replace_all_icase(s, "{.}", ".");
  replace_all_icase(s, "[dot]", ".");
  replace_all_icase(s, "(dot)", ".");
  replace_all_icase(s, "[:]", ":");
  replace_all_icase(s, "[@]", "@");
  replace_all_icase(s, "[at]", "@");
  replace_all_icase(s, "[/]", "/");
  return s;
}

std::optional<EntityType> classify_ioc(std::string_view candidate) {
  if (candidate.empty()) return std::nullopt;
  const auto& g = grammars();
  const std::string s(candidate);
  if (std::regex_match(s, g.url)) return EntityType::URL;
  if (std::regex_match(s, g.email)) return EntityType::Email;
  if (std::regex_match(s, g.registry)) return EntityType::Registry;
  if (std::regex_match(s, g.win_path) || std::regex_match(s, g.unix_path)) return EntityType::FilePath;
  if (std::regex_match(s, g.sha256)) return EntityType::HashSHA256;
  if (std::regex_match(s, g.sha1)) return EntityType::HashSHA1;
  if (std::regex_match(s, g.md5)) return EntityType::HashMD5;
  std::smatch m;
  if (std::regex_match(s, m, g.ip)) {
    bool valid = true;
    for (int i = 1; i <= 4; ++i) valid = valid && std::stoi(m[i].str()) <= 255;
    if (valid) return EntityType::IP;
  }
  if (std::regex_match(s, g.file_name)) return EntityType::FileName;
  if (std::regex_match(s, g.domain)) return EntityType::Domain;
  return std::nullopt;
}

ProtectedText protect_iocs(std::string_view text) {
  ProtectedText pt;
  pt.surrogate_text.reserve(text.size());
  std::size_t copied = 0;
  std::size_t i = 0;
  while (i < text.size()) {
    if (is_ws(text[i])) {
      ++i;
      continue;
    }
    std::size_t start = i;
    while (i < text.size() && !is_ws(text[i])) ++i;
    std::string_view chunk = text.substr(start, i - start);
    auto [b, e] = core_bounds(chunk);
    if (b >= e) continue;
    std::string_view core = chunk.substr(b, e - b);
    if (!worth_classifying(core)) continue;
    std::string refanged = refang(core);
    auto type = classify_ioc(refanged);
    if (!type) continue;

    const std::size_t orig_start = start + b;
    const std::size_t orig_end = start + e;
    pt.surrogate_text.append(text.substr(copied, orig_start - copied));
    ProtectedSpan span;
    span.original = {orig_start, orig_end};
    span.surrogate.start = pt.surrogate_text.size();
    pt.surrogate_text.append(kSurrogateWord);
    span.surrogate.end = pt.surrogate_text.size();
    span.surface = std::string(core);
    span.canonical = canonical_form(refanged, *type);
    span.ioc_type = *type;
    pt.span_map.push_back(std::move(span));
    copied = orig_end;
  }
  pt.surrogate_text.append(text.substr(copied));
  return pt;
}

std::size_t ProtectedText::to_original(std::size_t surrogate_offset) const {
  // Last span that ends at or before the offset determines the shift.
  auto it = std::upper_bound(span_map.begin(), span_map.end(), surrogate_offset,
                             [](std::size_t off, const ProtectedSpan& s) { return off < s.surrogate.end; });
  if (it == span_map.begin()) return surrogate_offset;
  const auto& prev = *std::prev(it);
  return surrogate_offset - prev.surrogate.end + prev.original.end;
}

std::string restore(const ProtectedText& pt) {
  std::string out;
  std::size_t copied = 0;
  for (const auto& s : pt.span_map) {
    out.append(pt.surrogate_text, copied, s.surrogate.start - copied);
    out += s.surface;
    copied = s.surrogate.end;
  }
  out.append(pt.surrogate_text, copied, std::string::npos);
  return out;
}

}  // namespace skg::nlp
