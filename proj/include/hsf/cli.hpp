#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hsf/error.hpp"

namespace hsf::cli {

enum ExitCode : int {
    kOk = 0,
    kDataError = 1,      // malformed or insufficient data
    kUsageError = 2,     // bad flags, missing files or models
    kInternalError = 3,
};

int exit_code_for(ErrorCode code);

/// Runs one command line (args[0] is the program name). Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace hsf::cli
