#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cspmon {

/// Line/column in a source text, 1-based. Zero means "unknown".
struct SourcePos {
  int line = 0;
  int column = 0;
};

enum class ErrorKind {
  Syntax,
  DuplicateDefinition,
  UnboundName,
  TypeMismatch,
  NonFiniteSet,
  UnknownChannel,
  BadPayload,
  ArityMismatch,
  StateSpaceExceeded,
  SessionNotRunning,
  UnmatchedEvent,
  PayloadOutOfRange,
  Io,
  Format,
  Network,
};

std::string_view to_string(ErrorKind kind);

/// The single exception type of the library. The kind identifies the failure
/// class; the position is set for errors that originate in a source text.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, SourcePos pos = {},
        std::string origin = {});

  ErrorKind kind() const noexcept { return kind_; }
  SourcePos pos() const noexcept { return pos_; }
  const std::string& origin() const noexcept { return origin_; }
  /// Message without location decoration.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  SourcePos pos_;
  std::string origin_;
  std::string detail_;
};

}  // namespace cspmon
