#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace breaklab::cli {

/// Exit codes of the breaklab command.
enum ExitCode : int {
    kOk = 0,
    kUsage = 1,      ///< bad flags or arguments
    kDataError = 2,  ///< unreadable input, invalid spec, missing table entry, degenerate data
    kNumerical = 3   ///< singular design or other numerical failure
};

/// Runs one breaklab invocation. args[0] is the program name. Machine output goes to
/// `out` (or to files named by flags); diagnostics go to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int dispatch(int argc, const char* const* argv);

}  // namespace breaklab::cli
