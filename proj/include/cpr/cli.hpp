#pragma once

#include <string>
#include <vector>

namespace cpr {

// Entry point behind the cpr binary; returns the process exit code.
// 0 success, 2 config/usage error, 3 non-convergence under --strict.
int run_cli(int argc, const char* const* argv);

// Resolves --g/--direction flags into a full per-class load vector. A scalar
// g with K > 1 requires a direction; mismatched sizes are rejected.
std::vector<double> resolve_load(const std::vector<double>& g,
                                 const std::vector<double>& direction, int num_classes);

}  // namespace cpr
