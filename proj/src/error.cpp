#include "cspmon/error.hpp"

namespace cspmon {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Syntax: return "SyntaxError";
    case ErrorKind::DuplicateDefinition: return "DuplicateDefinition";
    case ErrorKind::UnboundName: return "UnboundName";
    case ErrorKind::TypeMismatch: return "TypeMismatch";
    case ErrorKind::NonFiniteSet: return "NonFiniteSet";
    case ErrorKind::UnknownChannel: return "UnknownChannel";
    case ErrorKind::BadPayload: return "BadPayload";
    case ErrorKind::ArityMismatch: return "ArityMismatch";
    case ErrorKind::StateSpaceExceeded: return "StateSpaceExceeded";
    case ErrorKind::SessionNotRunning: return "SessionNotRunning";
    case ErrorKind::UnmatchedEvent: return "UnmatchedEvent";
    case ErrorKind::PayloadOutOfRange: return "PayloadOutOfRange";
    case ErrorKind::Io: return "IoError";
    case ErrorKind::Format: return "FormatError";
    case ErrorKind::Network: return "NetworkError";
  }
  return "Error";
}

namespace {

std::string decorate(ErrorKind kind, const std::string& message, SourcePos pos,
                     const std::string& origin) {
  std::string out;
  if (!origin.empty()) out += origin + ":";
  if (pos.line > 0) {
    out += std::to_string(pos.line) + ":" + std::to_string(pos.column) + ":";
  }
  if (!out.empty()) out += " ";
  out += std::string(to_string(kind)) + ": " + message;
  return out;
}

}  // namespace

Error::Error(ErrorKind kind, const std::string& message, SourcePos pos, std::string origin)
    : std::runtime_error(decorate(kind, message, pos, origin)),
      kind_(kind),
      pos_(pos),
      origin_(std::move(origin)),
      detail_(message) {}

}  // namespace cspmon
