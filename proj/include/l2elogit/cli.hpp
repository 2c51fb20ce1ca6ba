#pragma once

#include <iosfwd>

namespace l2e {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitNonConvergence = 3,
};

/// Entry point of the `l2elogit` tool: subcommands fit, path, cv, simulate.
int cli_dispatch(int argc, const char* const* argv);

/// Same, with explicit streams for output written to "-" and for messages.
int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace l2e
