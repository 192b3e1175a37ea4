#pragma once

#include <string>
#include <vector>

namespace qmaxwell {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitNotConverged = 2,
  kExitBadInput = 3,
  kExitUsage = 64,
};

/// Entry point of the `qmaxwell` tool; returns the process exit code.
int run_cli(int argc, const char* const* argv);
/// Same, with args[0] the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace qmaxwell
