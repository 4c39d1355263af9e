#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace deriver {

/// Exit codes of `deriver check`, also used for every other subcommand.
enum ExitCode : int { Complete = 0, Incomplete = 1, HasErrors = 2, Failure = 3 };

struct CliStreams {
    std::ostream& out;
    std::ostream& err;
    bool color = false;
};

/// Runs the command line front end. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, CliStreams io);

}  // namespace deriver
