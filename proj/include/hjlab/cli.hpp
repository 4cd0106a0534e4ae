#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hjlab::cli {

inline constexpr int kExitPass = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitAssertionFailure = 2;

/// Environment variable consulted when neither --workers nor campaign.workers is set.
inline constexpr const char* kWorkersEnv = "HJLAB_WORKERS";

/// Entry point: args excludes the program name, e.g. {"verify", "--config", "c.json"}.
/// Subcommands: sample-env, solve, estimate, effective, rate, verify.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace hjlab::cli
