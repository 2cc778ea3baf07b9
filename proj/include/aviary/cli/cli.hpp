#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace aviary::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

// Subcommands: synth, features audio|thermal|env, flow, aggregate,
// stats anova|tests|correlate|contrast, report, pipeline. `args` excludes the
// program name. Prints one "path: summary" line per artifact to `out` and
// errors to `err`. Returns 0 on success, 1 on a usage or validation error,
// 2 on an I/O error. Option precedence: flags, then --config, then defaults.
int run_subcommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace aviary::cli
