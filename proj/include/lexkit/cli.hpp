#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lexkit {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;  // bad flags or inputs
inline constexpr int kExitEnvironment = 2;  // I/O, connection, protocol

// Runs `lexkit` with argv-style arguments (args[0] is the program name).
// Output files are written directly; "-" as an output path means `out`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lexkit
