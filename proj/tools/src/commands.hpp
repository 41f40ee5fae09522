#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rdc::cli {

enum ExitCode : int { ok = 0, usage = 1, validation = 2, numerical = 3 };

/// Runs the rdc command line; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rdc::cli
