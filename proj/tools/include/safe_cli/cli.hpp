#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace safe::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumeric = 1;
inline constexpr int kExitUsage = 2;

/// Runs the command line `args` (without the program name). Results go to
/// `out` or to the requested output file, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Seed used when --seed is absent: SAFE_SEED if set and valid, else 1.
std::uint64_t default_seed();

}  // namespace safe::cli
