#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sglab {

/// Machine-readable failure categories. Every exception thrown by the library
/// carries one of these so the CLI can map it to an exit code and a reason.
enum class ErrorCode {
  InvalidPoint,
  DimensionError,
  InvalidArgument,
  MeanNotZero,
  InvalidDensity,
  NoConvergence,
  ConvexityLost,
  ResolutionError,
  NotBalanced,
  DegenerateCloud,
  TimestepTooLarge,
  InvalidTrajectory,
  StateInvalid,
  UsageError,
  InvalidValue,
  SyntaxError,
  IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace sglab
