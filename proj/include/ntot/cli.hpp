#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ntot/experiments.hpp"

namespace ntot {

inline constexpr std::string_view kVersion = "1.0.0";

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitFailure = 2,
  kExitCertificate = 3,
};

/// Entry point of the `ntot` executable: gen, solve, sweep, ric and
/// oracle-check subcommands. Output goes to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// CSV writers used by the solve and sweep commands.
void write_trace_csv(std::ostream& out, Variant algorithm, const std::vector<TraceRecord>& trace);
void write_success_csv(std::ostream& out, const std::vector<SuccessRow>& rows);
void write_iterations_csv(std::ostream& out, const std::vector<IterationRow>& rows);
void write_residual_csv(std::ostream& out, const std::vector<ResidualRow>& rows);

}  // namespace ntot
