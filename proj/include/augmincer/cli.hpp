// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <exception>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace augmincer::cli {

inline constexpr std::string_view kToolName = "augmincer";
inline constexpr std::string_view kToolVersion = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitValidation = 1,
  kExitIo = 2,
  kExitNumerical = 3,
};

/// Exit code for an exception escaping a subcommand.
int exit_code_for(const std::exception& e);

/// Runs the command line `args` (without the program name). Results go to
/// files under --out; progress and errors go to `err`, help text to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace augmincer::cli
