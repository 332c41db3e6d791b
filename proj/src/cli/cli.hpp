#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace aeg::cli {

inline constexpr const char* kVersion = "aeg 0.1.0";

/// Runs one command. args[0] is the program name. Returns the exit code:
/// 0 success, 1 usage or input error, 2 numerical failure or a failed check.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace aeg::cli
