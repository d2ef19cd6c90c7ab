#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pnormal::cli {

/// Exit codes of the command-line front end.
enum ExitCode : int { kVerdict = 0, kUsage = 1, kInconclusive = 2 };

/// Runs one invocation; args excludes the program name. Human summaries go to `out`
/// (or `err` when JSON is streamed to `out` with `--json -`).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pnormal::cli
