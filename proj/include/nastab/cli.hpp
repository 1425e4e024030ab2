#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace nastab {

enum ExitCode : int {
  kExitPass = 0,
  kExitFail = 1,
  kExitUsage = 2,
  kExitInconclusive = 3,
};

/// Entry point of the `nastab` tool. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace nastab
