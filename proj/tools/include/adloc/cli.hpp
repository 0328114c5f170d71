#pragma once

#include <iosfwd>

namespace adloc::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kDomainError = 1;
inline constexpr int kUsageError = 2;

/// The `adloc` command line: ingest, run, eval, serve. Machine output goes
/// to `out` (JSON with --json), diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace adloc::cli
