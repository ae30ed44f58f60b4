#pragma once

#include <stdexcept>
#include <string>

namespace tod {

enum class ErrorCode {
  Oversize,
  BadMagic,
  UnknownVersion,
  UnknownTopic,
  LengthMismatch,
  Truncated,
  InvalidField,
  UnknownFrame,
  DisconnectedFrames,
  NonFinite,
  InvalidArgument,
  Closed,
  Parse,
  Validation,
  Io,
  Aborted,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tod
