#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace groupform {

/// Exit statuses of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitConfig = 2,
  kExitNumerical = 3,
  kExitIo = 4,
};

/// Entry point behind the `groupform` executable. `args` excludes the program
/// name. Progress records go to `out`; failures are written to `err` as one
/// JSON object per line.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace groupform
