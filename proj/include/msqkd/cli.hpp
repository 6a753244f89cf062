#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace msqkd {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitDomain = 2,  ///< inadmissible input or an I/O failure
  kExitNoKey = 3,
};

/// Runs one subcommand. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace msqkd
