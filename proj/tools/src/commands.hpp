#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace figshot::cli {

/// Runs the command line `args` (without the program name). Normal output
/// goes to `out`, logs and errors to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace figshot::cli
