#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "a2x/error.hpp"

namespace a2x {

/// Process exit codes of the `a2x` tool.
enum class ExitStatus : int {
  kOk = 0,
  kValidation = 2,  // bad arguments, malformed or invalid input files
  kInfeasible = 3,  // infeasible assignment, size guard, oracle mismatch
  kIo = 4,
};

ExitStatus exit_status_for(ErrorKind kind) noexcept;

/// Runs the command line (args[0] is the program name). Reports go to
/// `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace a2x
