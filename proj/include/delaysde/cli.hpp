#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace delaysde::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitThreshold = 4;

/// Parses `args` (without the program name) and dispatches to a subcommand.
/// Reports go to `out` unless an output path is given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace delaysde::cli
