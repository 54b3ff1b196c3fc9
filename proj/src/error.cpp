#include "sglab/error.hpp"

namespace sglab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidPoint: return "InvalidPoint";
    case ErrorCode::DimensionError: return "DimensionError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MeanNotZero: return "MeanNotZero";
    case ErrorCode::InvalidDensity: return "InvalidDensity";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::ConvexityLost: return "ConvexityLost";
    case ErrorCode::ResolutionError: return "ResolutionError";
    case ErrorCode::NotBalanced: return "NotBalanced";
    case ErrorCode::DegenerateCloud: return "DegenerateCloud";
    case ErrorCode::TimestepTooLarge: return "TimestepTooLarge";
    case ErrorCode::InvalidTrajectory: return "InvalidTrajectory";
    case ErrorCode::StateInvalid: return "StateInvalid";
    case ErrorCode::UsageError: return "UsageError";
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace sglab
