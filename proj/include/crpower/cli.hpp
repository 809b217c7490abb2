#pragma once

#include <ostream>

namespace crpower {

/// Exit codes of the command-line front end.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,         ///< bad flags, unreadable or malformed input
    kExitSolverFailure = 2,
    kExitValidationGap = 3,
};

/// Entry point behind the `crpower` executable. Subcommands: solve, sweep,
/// validate, leakage. Regular output goes to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace crpower
