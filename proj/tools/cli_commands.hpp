#pragma once

#include <iosfwd>

namespace ordtensor::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kData = 3,
  kNumerical = 4,
};

/// Parses argv and runs one subcommand. Data and written paths go to `out`,
/// diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ordtensor::cli
