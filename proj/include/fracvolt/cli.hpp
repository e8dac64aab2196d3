#pragma once

#include <iosfwd>

namespace fracvolt {

/// Exit codes of the fracvolt command.
enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitUsage = 2,
  kExitSolver = 3,
  kExitIo = 4,
};

/// Entry point of the fracvolt command line.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fracvolt
