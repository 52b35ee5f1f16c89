#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace viscon {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// `args` excludes the program name. A leading "plan-synth" token is accepted
// as a prefix for `generate`.
int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace viscon
