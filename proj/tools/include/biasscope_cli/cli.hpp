#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace biasscope::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

// Runs one command line. args excludes the program name. Data goes to out,
// diagnostics to err.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace biasscope::cli
