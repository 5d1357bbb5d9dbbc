#pragma once

#include <iosfwd>

namespace csc {

inline constexpr const char* kLibraryVersion = "0.1.0";

/// Exit codes of the command-line driver.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitValidation = 2,
  kExitNumerical = 3,
};

/// Entry point of the `csc` tool; reports go to `out`, errors and help
/// text for usage errors to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace csc
