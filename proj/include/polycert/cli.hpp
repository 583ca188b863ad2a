#pragma once

#include <iosfwd>

namespace polycert::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Entry point shared by the polycert executable and the tests. argv[0] is
/// the program name. Returns 0 on success, 1 on a runtime failure and 2 on a
/// usage error.
int run_cli(int argc, const char* const argv[], std::ostream& out, std::ostream& err);

}  // namespace polycert::cli
