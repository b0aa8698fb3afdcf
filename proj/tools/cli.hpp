#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stablegof::cli {

enum ExitCode { kOk = 0, kUsage = 1, kInput = 2, kNumerical = 3 };

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stablegof::cli
