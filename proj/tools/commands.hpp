#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace concentra::cli {

// Exit codes of the command-line tool.
enum ExitCode : int {
  kSuccess = 0,
  kRuntimeError = 1,  // I/O failure, or a verifier found a violation
  kRefused = 2,       // bad arguments, precondition or size guard
};

// Parses `args` (without the program name) and runs one subcommand. Normal
// output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace concentra::cli
