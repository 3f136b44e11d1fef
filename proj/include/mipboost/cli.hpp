#pragma once

#include <string>
#include <vector>

namespace mipboost {

/// Runs one CLI command (select, tune, cv-curve, generate, bench, whiten).
/// Returns the process exit code; failures print a machine-readable error
/// line to stderr. All artifacts land under the --out directory.
int run_command(const std::vector<std::string>& args);

}  // namespace mipboost
