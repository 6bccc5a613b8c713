#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dq::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUsage = 2;

// Environment variable naming the default directory for report documents
// when --out is not given.
inline constexpr const char* kOutputDirEnv = "DQKIT_OUTPUT_DIR";

// args[0] is the program name. Documents go to --out, the default output
// directory, or `out`; diagnostics go to `err`. Nothing is written to any
// output path unless the command succeeds.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dq::cli
