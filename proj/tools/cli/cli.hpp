#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ovf::cli {

enum ExitCode : int { kOk = 0, kViolation = 1, kBadInput = 2 };

/// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Writes through a temporary file in the same directory, then renames.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace ovf::cli
