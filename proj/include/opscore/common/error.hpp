#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace opscore {

enum class ErrorCode {
  InvalidArgument,
  InvalidScenario,
  UnreachableStart,
  SteppedAfterDone,
  ShapeMismatch,
  NonFiniteGradient,
  NonFiniteInput,
  NonFiniteObservation,
  NonFiniteLoss,
  UnnormalizedInput,
  NegativeInfraction,
  EmptyMask,
  EmptyBuffer,
  VersionMismatch,
  CorruptCheckpoint,
  CheckpointLoadError,
  ControllerDiverged,
  InsufficientExperts,
  SessionTooShort,
  ParseError,
  IoError,
  BindFailure,
  MalformedMessage,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the whole library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code), detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& detail) { throw Error(code, detail); }

inline void require(bool condition, ErrorCode code, const std::string& detail) {
  if (!condition) fail(code, detail);
}

}  // namespace opscore
