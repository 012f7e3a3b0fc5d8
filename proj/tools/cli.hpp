#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dhla::cli {

/// Exit statuses of the `dhla` tool.
enum ExitCode : int {
  kOk = 0,
  kUsage = 2,     // bad flags or parameters
  kData = 3,      // unreadable or malformed input
  kCapacity = 4,  // restore candidate buffer overflow
};

/// Runs the tool with argv[1..] in `args`. Normal output goes to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dhla::cli
