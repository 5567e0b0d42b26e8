#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace refbm {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
  exit_ok = 0,
  exit_usage = 1,
  exit_infeasible = 2,
  exit_invalid_campaign = 3,
  exit_io = 4,
};

/// Runs the command line `args` (without the program name), writing normal
/// output to `out` and diagnostics to `err`. Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace refbm
