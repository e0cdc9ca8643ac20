#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace agwo::cli {

/// Exit codes: 0 ok, 1 runtime failure, 2 configuration error, 3 leakage refusal.
enum ExitCode : int { kOk = 0, kRuntime = 1, kConfig = 2, kLeakage = 3 };

/// Entry point shared by the executable and the tests. `args` excludes argv[0].
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace agwo::cli
