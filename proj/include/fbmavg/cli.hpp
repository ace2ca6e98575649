#pragma once

// Command-line front end: `generate`, `experiment` and `verify`.
//
// Exit codes: 0 success, 1 runtime or statistical failure, 2 usage error.

#include <ostream>
#include <string>
#include <vector>

namespace fbmavg {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fbmavg
