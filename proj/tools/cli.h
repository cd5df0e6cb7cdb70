#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace echoreason::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitValidation = 2,
  kExitVerifier = 3,
};

// Runs the command line `args` (args[0] is the program name). Machine
// output goes to `out`, diagnostics to `err`.
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace echoreason::cli
