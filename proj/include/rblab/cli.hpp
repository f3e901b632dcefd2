#pragma once

namespace rblab::cli {

/// Parses argv, runs one subcommand, writes the requested artifacts into the
/// output directory, and returns the process exit code: 0 all checks passed,
/// 1 solver error, 2 failed invariant / assumption / certificate check,
/// 3 configuration error.  Never calls exit(), so tests may invoke it
/// in-process.
int run(int argc, const char* const* argv);

}  // namespace rblab::cli
