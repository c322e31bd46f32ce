#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace oblique {

enum class ErrorCode {
  AllZero,
  DimensionMismatch,
  DirectSumViolation,
  NotAFrame,
  NotADual,
  HypothesisViolated,
  MarginalMismatch,
  SupportOutsideSubspace,
  RangeViolation,
  NonConvergence,
  InvalidArgument,
  ParseError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above; the CLI
// maps them onto process exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DirectSumViolation: return "DirectSumViolation";
    case ErrorCode::NotAFrame: return "NotAFrame";
    case ErrorCode::NotADual: return "NotADual";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::MarginalMismatch: return "MarginalMismatch";
    case ErrorCode::SupportOutsideSubspace: return "SupportOutsideSubspace";
    case ErrorCode::RangeViolation: return "RangeViolation";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace oblique
