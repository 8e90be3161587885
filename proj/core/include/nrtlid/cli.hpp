#ifndef NRTLID_CLI_HPP
#define NRTLID_CLI_HPP

#include <string>
#include <vector>

namespace nrtlid::cli {

// Exit codes: 0 success, 2 configuration error, 3 numerical failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericalError = 3;

// Full command-line entry point (subcommand + flags), exposed so tests can
// drive the tool in-process. args excludes the program name.
int run(const std::vector<std::string>& args);

int run(int argc, const char* const* argv);

}  // namespace nrtlid::cli

#endif
