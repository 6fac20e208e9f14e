#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace stratevo::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,      // runtime error, refusal, corrupt log
  kBadConfig = 2,    // usage or config validation error
  kInterrupted = 3,  // provider exhausted; the run can be resumed
};

/// Parses `args` (without the program name) and executes the command.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stratevo::cli
