#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kinodiff::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kInputError = 2, kNumericError = 3 };

/// Runs one `kinodiff` command line (args[0] is the program name). Normal
/// output goes to `out`, diagnostics to `err`; the return value is the
/// process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kinodiff::cli
