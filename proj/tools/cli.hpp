#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace morphgate::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs one invocation; `args` excludes the program name.
/// Machine-readable results go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace morphgate::cli
