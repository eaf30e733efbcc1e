#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace kaclab {

enum class ErrorCode {
  SingularPoint,
  DomainError,
  DivergentMoment,
  AccuracyNotReached,
  ResolutionError,
  StiffnessError,
  DegenerateFit,
  WindowTooSmall,
  UnsupportedRegime,
  InsufficientSamples,
  KernelMismatch,
  Overflow,
  ParseError,
  ConfigError,
  IoError,
};

inline std::string_view to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::SingularPoint: return "SingularPoint";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::DivergentMoment: return "DivergentMoment";
    case ErrorCode::AccuracyNotReached: return "AccuracyNotReached";
    case ErrorCode::ResolutionError: return "ResolutionError";
    case ErrorCode::StiffnessError: return "StiffnessError";
    case ErrorCode::DegenerateFit: return "DegenerateFit";
    case ErrorCode::WindowTooSmall: return "WindowTooSmall";
    case ErrorCode::UnsupportedRegime: return "UnsupportedRegime";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::KernelMismatch: return "KernelMismatch";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace kaclab
