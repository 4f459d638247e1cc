#pragma once

#include <ostream>

namespace hyperflow::cli {

enum ExitCode : int { kOk = 0, kFails = 1, kUsage = 2, kInternal = 3 };

/// Runs one command line. Results go to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hyperflow::cli
