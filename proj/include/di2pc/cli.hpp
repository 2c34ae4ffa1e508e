#pragma once

// Command-line front end. Every subcommand is a thin adapter over the
// library; see README.md for the flag reference.

#include <iosfwd>
#include <string>
#include <vector>

#include "di2pc/errors.hpp"

namespace di2pc::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitVerification = 3;
inline constexpr int kExitCap = 4;

int exit_code(ErrorKind kind) noexcept;

/// Runs one command line (without the program name). Results go to `out`
/// unless --out names a file; errors go to `err` as one JSON line.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace di2pc::cli
