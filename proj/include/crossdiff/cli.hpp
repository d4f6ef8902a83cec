#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace crossdiff {

/// Exit statuses of the command-line front end.
enum ExitCode : int { kExitOk = 0, kExitIo = 1, kExitUsage = 2, kExitNumerical = 3 };

/// Runs the command-line tool. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Parses `key = value` lines; '#' starts a comment, blank lines are
/// skipped, keys are case-sensitive. Returns the pairs in file order.
std::vector<std::pair<std::string, std::string>> parse_config(std::istream& in);

}  // namespace crossdiff
