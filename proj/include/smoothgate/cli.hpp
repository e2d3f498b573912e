#pragma once

#include <iosfwd>

namespace smoothgate::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsage = 1,
  kSolverExhausted = 2,
  kSynthesisFailure = 3,
  kVerificationFailure = 4,
};

/// Entry point of the command-line front end: subcommands solve, synth,
/// verify-tables, sweep and potential. Outputs go to the run directory given
/// by --out, together with resolved_config.json.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace smoothgate::cli
