#pragma once

namespace plaus {

// Full command-line entry point; returns the process exit code.
// 0 = success, 2 = argument/usage error, 3 = numeric failure.
int run_cli(int argc, const char* const* argv);

}  // namespace plaus
