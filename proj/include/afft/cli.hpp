#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace afft::cli {

enum ExitCode : int { kOk = 0, kValidateFailed = 1, kInputError = 2, kComputeError = 3 };

/// Entry point of the `afft` tool; args excludes the program name.
/// Subcommands: train, query, synth, validate.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace afft::cli
