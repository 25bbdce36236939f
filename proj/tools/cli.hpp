#pragma once

#include <iosfwd>

namespace gnan::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNotConverged = 2;

/// Entry point for the `gnan` command line. Writes normal output to `out`
/// and diagnostics to `err`; returns the process exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gnan::cli
