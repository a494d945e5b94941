#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace periodbounds::cli {

enum ExitCode : int {
  kSuccess = 0,
  kDomainError = 2,
  kNonConvergence = 3,
  kIoError = 4,
};

/// Runs one subcommand. `args` excludes the program name.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace periodbounds::cli
