#pragma once

#include <iosfwd>

namespace wbcde::cli {

/// Exit codes of run_cli.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the wbcde command line. Diagnostics go to `err`; help and
/// version text go to `out`. Data is only ever written to files.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wbcde::cli
