#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cpm::cli {

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kError = 2 };

/// Runs one command; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cpm::cli
