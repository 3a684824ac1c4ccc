#pragma once

#include <iostream>

namespace roundtable {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `roundtable` tool. Failures are reported on `err` as a
/// one-line JSON object ("roundtable-error/1") and mapped to a nonzero exit.
int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
            std::ostream& err = std::cerr);

}  // namespace roundtable
