#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mixsdde::cli {

// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "MIXSDDE_OUTPUT_DIR";

// Runs the command line tool on args (args[0] is the program name) and returns
// the process exit code. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mixsdde::cli
