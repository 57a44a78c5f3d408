#pragma once

#include <iosfwd>

namespace lasertune {

enum ExitCode : int {
  kExitOk = 0,
  kExitInputError = 2,
  kExitInfeasible = 3,
  kExitNonConvergence = 4,
};

/// Entry point of the `lasertune` tool. Never throws; errors map to exit codes.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lasertune
