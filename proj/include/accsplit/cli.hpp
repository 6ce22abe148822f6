#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace accsplit {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,          // converged / check passed
  kExitBadArgs = 1,     // invalid flags or configuration
  kExitMaxIters = 2,    // iteration cap reached / check out of range
  kExitDiverged = 3,    // divergence / fit failure
};

/// Default output directory when neither --output-dir nor the
/// ACCSPLIT_OUTPUT_DIR environment variable is set.
inline constexpr const char* kDefaultOutputDir = "accsplit-out";

/// Runs the command line `accsplit <args...>` (program name excluded) and
/// returns the exit code. Subcommands: solve, order-check, rates, lasso,
/// matcomp. Each accepts --config FILE with `key = value` lines whose keys are
/// the long option names; flags given on the command line take precedence.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace accsplit
