#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "oblique/error.hpp"

namespace oblique::cli {

enum ExitStatus : int {
  kOk = 0,
  kValidationError = 2,
  kHypothesisViolation = 3,
  kNonConvergence = 4,
};

int exit_status(ErrorCode code) noexcept;

/// Parses `args` (without the program name) and runs one verb. Reports go to
/// `out` unless --out is given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace oblique::cli
