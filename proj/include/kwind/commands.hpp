#pragma once

// Subcommand implementations. Each returns a process exit code:
// 0 success, 1 argument or config error, 2 partial ensemble failure,
// 3 numeric failure.

#include <ostream>
#include <string>

#include "kwind/acceptance.hpp"
#include "kwind/config.hpp"

namespace kwind {

enum ExitCode : int { kExitOk = 0, kExitArgument = 1, kExitPartial = 2, kExitNumeric = 3 };

int cmd_spin_run(const RunConfig& c, std::ostream& log);
int cmd_analytic(const RunConfig& c, std::ostream& log);
int cmd_scramblon(const RunConfig& c, std::ostream& log);
int cmd_selftest(const AcceptanceOptions& opts, std::ostream& log);

/// Maps exceptions from a command body to exit codes, reporting on log.
int guarded(std::ostream& log, const std::function<int()>& body);

}  // namespace kwind
