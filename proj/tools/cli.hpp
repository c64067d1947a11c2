#pragma once

#include <ostream>

namespace kktstab::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 1,
  kSolverFailure = 2,
  kInconclusive = 3,
  kConflict = 4,
};

/// Runs one kktstab invocation; argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kktstab::cli
