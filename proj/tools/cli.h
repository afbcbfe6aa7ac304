#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hermite::cli {

/// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kNumericalFailure = 1;
inline constexpr int kValidationFailure = 2;

/// Runs the command line `args` (without the program name). Results go to
/// files; `out` gets a one-line summary per command, `err` messages and the
/// wall time.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hermite::cli
