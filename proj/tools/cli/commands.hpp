#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace thetaem::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,  ///< gamma-verify found a failing grid point
  kConfigError = 2,
  kDegenerate = 3,   ///< every path froze; partial output was written
};

/// Runs the command line `args` (args[0] is the program name). Normal
/// output goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Formats a double for CSV output (17 significant digits).
std::string format_real(double v);

}  // namespace thetaem::cli
