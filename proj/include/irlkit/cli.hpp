#pragma once

// Command-line front end. Subcommands: validate, solve, equiv, transform, lab.
//
// Exit codes: 0 success (equiv: equivalent, lab: claim passed), 1 negative
// outcome (equiv: not equivalent, lab: claim failed), 2 invalid input or
// unknown claim, 3 solver did not converge, 4 internal consistency failure.

#include <iosfwd>
#include <string>
#include <vector>

namespace irl::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_negative = 1,
    exit_invalid = 2,
    exit_convergence = 3,
    exit_internal = 4,
};

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace irl::cli
