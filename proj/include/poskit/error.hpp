#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace poskit {

enum class ErrorCode {
  InvalidArgument,
  OutOfRange,
  TargetNotFound,
  PoolTooSmall,
  IncompatibleVariant,
  SourceExhausted,
  IndexOutOfRange,
  ValueNotFound,
  DivisionByZero,
  UnsupportedNode,
  GenerationExhausted,
  BackendUnavailable,
  MalformedResponse,
  EmptySubset,
  MixedConditions,
  MissingDirection,
  SpanMismatch,
  Config,
  Io,
  Parse,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

  ErrorCode code() const noexcept { return code_; }

  /// The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace poskit
