#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace skg {

enum class ErrorCode {
  MalformedEncoding,
  TypeMismatch,
  EmptyDescription,
  DuplicateName,
  UnknownComponent,
  BuildError,
  UnreadablePayload,
  SourceUnavailable,
  WindowTooShort,
  TemplateMismatch,
  GazetteerMissing,
  DegenerateCorpus,
  NonfiniteLoss,
  ValidationError,
  ConflictingGroup,
  CorruptLog,
  VersionMismatch,
  SyntaxError,
  UnboundVariable,
  NotFound,
  EmptyGraph,
  BadRequest,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the whole library. `offset` carries a byte
/// offset (encodings, store logs) or a character position (query syntax).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> offset = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  const std::optional<std::size_t>& offset() const noexcept { return offset_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> offset_;
};

}  // namespace skg
