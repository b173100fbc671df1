#pragma once

#include <iosfwd>

namespace qnet {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kPrFail = 1;
inline constexpr int kInput = 2;
inline constexpr int kStability = 3;
inline constexpr int kInconclusive = 4;
}  // namespace exit_code

/// Entry point of the qnet command-line tool; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qnet
