#pragma once

// poskit command-line entry point. Exit codes: 0 success, 1 usage or
// configuration error, 2 runtime error.

#include <iostream>

namespace poskit {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr);

}  // namespace poskit
