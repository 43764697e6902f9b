#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nefreg::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kBadFlags = 2;
inline constexpr int kBadInput = 3;
inline constexpr int kNumericFailure = 4;
inline constexpr int kCellFailure = 5;

// Runs `nefreg <subcommand> ...`; args[0] is the program name. Diagnostics go
// to err; subcommands write their results to files (fit may use stdout).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Observations from a one-column file or an `index,value` file. A first row
// whose first token is not numeric is taken as a header. Throws
// std::runtime_error on unreadable or malformed input.
std::vector<double> read_observations(const std::string& path);

}  // namespace nefreg::cli
