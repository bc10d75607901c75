#pragma once

#include <string>
#include <vector>

namespace ncalc {

/// One CLI invocation, runnable in-process for tests.
struct CliResult {
    int exit_code = 0; // 0 pass, 1 fail, 2 usage/parse, 3 untestable
    std::string out;   // canonical report
    std::string err;   // usage errors and timing
};

/// Runs the command given by args (program name excluded).
CliResult run_cli(const std::vector<std::string>& args);

} // namespace ncalc
