// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace tensim::cli {

enum ExitCode : int { kOk = 0, kSimulatorError = 1, kUsageError = 2 };

// Parses args (without the program name) and runs one subcommand.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tensim::cli
