#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "epsctl/error.hpp"

namespace epsctl::cli {

inline constexpr std::string_view kVersion = "1.0.0";

// Stable process exit codes.
enum ExitCode : int {
    kOk = 0,
    kParseError = 2,
    kStructuralFailure = 3,
    kSolverFailure = 4,
    kContainmentViolation = 5,
};

int exit_code_for(Errc code);

// Shortest-round-trip-safe decimal form with 17 significant digits.
std::string format_number(double v);

// Runs the command line (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace epsctl::cli
