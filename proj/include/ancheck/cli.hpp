#pragma once

// Command-line front end.

#include <iosfwd>

namespace ancheck {

// Exit codes: 0 no crashes, 1 crashes found, 2 usage or annotation error,
// 3 worker or protocol failure.
inline constexpr int kExitClean = 0;
inline constexpr int kExitCrashes = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitWorker = 3;

int run_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ancheck
