#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lulc {

// Exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfigError = 1,
  kExitRuntimeError = 2,
  kExitInfeasibleScenario = 3,
};

// Entry point for `lulc_ppo <command> [flags]`; `args` excludes the program
// name. Reports go to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lulc
