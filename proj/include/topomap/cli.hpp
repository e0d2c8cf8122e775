#pragma once

#include <iosfwd>

namespace topomap::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int {
    kOk = 0,
    kUsage = 2,
    kDataError = 3,
    kNumericalFailure = 4,
    kOutOfMemory = 5,
};

/// Entry point of the `topomap` tool (subcommands gen-saddle, fit, eval, tune, bench).
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace topomap::cli
