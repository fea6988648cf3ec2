#pragma once

#include <ostream>

namespace icesheet {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNonConvergence = 3;

/// Entry point of the `icesheet` command-line tool. Returns the process
/// exit code; never throws.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace icesheet
