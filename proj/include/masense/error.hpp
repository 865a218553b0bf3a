#pragma once

#include <stdexcept>
#include <string>

namespace masense {

enum class ErrorCode {
  InvalidArgument,
  InfeasibleSfp,
  BadSubarray,
  InsufficientPeaks,
  SearchSpaceTooLarge,
  NoFeasiblePoint,
  SingularScale,
  ConfigError,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InfeasibleSfp: return "InfeasibleSfp";
    case ErrorCode::BadSubarray: return "BadSubarray";
    case ErrorCode::InsufficientPeaks: return "InsufficientPeaks";
    case ErrorCode::SearchSpaceTooLarge: return "SearchSpaceTooLarge";
    case ErrorCode::NoFeasiblePoint: return "NoFeasiblePoint";
    case ErrorCode::SingularScale: return "SingularScale";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace masense
