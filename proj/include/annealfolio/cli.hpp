#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace annealfolio {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitInput = 2;

/// Runs one CLI invocation. args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace annealfolio
