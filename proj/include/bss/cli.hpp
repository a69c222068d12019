#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bss {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitData = 3, kExitNumerical = 4 };

/// Runs one command line (args exclude the program name). Results go to
/// `out` unless an --out file is given; diagnostics go to `err`.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bss
