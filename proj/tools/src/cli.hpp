#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace genforge::cli {

/// Exit statuses of the command-line tool.
enum Status : int { kOk = 0, kDomainError = 1, kUsageError = 2 };

/// Parses `args` (without the program name) and runs one subcommand. Data
/// goes to `out` unless an output file is requested; diagnostics go to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace genforge::cli
