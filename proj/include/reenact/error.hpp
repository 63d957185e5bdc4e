#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace reenact {

enum class ErrorCode {
  Io,
  BadFormat,
  BlobSizeMismatch,
  IndexOutOfRange,
  TooFewVertices,
  LengthMismatch,
  DegenerateConfiguration,
  NumericalFailure,
  EmptyClip,
  ModelMismatch,
  InvalidStats,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Raised by every library operation. Callers branch on code(), not on the
/// message text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// True for problems with user-supplied data, as opposed to environment or
  /// runtime failures. Drives CLI exit codes.
  bool is_data_error() const noexcept { return code_ != ErrorCode::Io && code_ != ErrorCode::NumericalFailure; }

 private:
  ErrorCode code_;
};

}  // namespace reenact
