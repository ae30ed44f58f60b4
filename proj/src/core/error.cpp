#include "tod/core/error.hpp"

namespace tod {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Oversize: return "oversize";
    case ErrorCode::BadMagic: return "bad magic";
    case ErrorCode::UnknownVersion: return "unknown version";
    case ErrorCode::UnknownTopic: return "unknown topic";
    case ErrorCode::LengthMismatch: return "length mismatch";
    case ErrorCode::Truncated: return "truncated";
    case ErrorCode::InvalidField: return "invalid field";
    case ErrorCode::UnknownFrame: return "unknown frame";
    case ErrorCode::DisconnectedFrames: return "disconnected frames";
    case ErrorCode::NonFinite: return "non-finite value";
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::Closed: return "closed";
    case ErrorCode::Parse: return "parse error";
    case ErrorCode::Validation: return "validation error";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::Aborted: return "aborted";
  }
  return "unknown";
}

}  // namespace tod
