#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace hthk::io {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs one `hthk` subcommand. `args` excludes the program name. Machine
/// readable output goes to `out`; the human summary goes to `err`, or to
/// `out` when files are written with --out.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hthk::io
