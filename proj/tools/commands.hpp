#pragma once

#include <iosfwd>

namespace copmarkov::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitNumerical = 2;

/// Runs one subcommand (fit, scan, vuong, simulate, tau, contour) and
/// returns the process exit code. Normal output goes to `out`, diagnostics
/// to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace copmarkov::cli
