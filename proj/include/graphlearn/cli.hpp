#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace graphlearn {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Runs `graphlearn <subcommand> [options]`; args excludes the program name.
/// Returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace graphlearn
