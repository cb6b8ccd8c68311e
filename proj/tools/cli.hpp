#pragma once

#include <exception>
#include <ostream>

namespace esas::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kProtocol = 2,
  kIo = 3,
};

// Parses argv, runs one command and writes its JSON result to `out`.
// Diagnostics go to `err` only.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

int exit_code_for(const std::exception& e);

}  // namespace esas::cli
