#pragma once

#include <string>
#include <vector>

namespace sid {

// CLI dispatch (also the test entry point). Returns a process exit code:
// 0 when the requested pipeline completed.
int run_cli(std::vector<std::string> args);

}  // namespace sid
