#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mginf::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
    kOk = 0,
    kUsage = 1,         ///< bad flags, bad law spec, unwritable output
    kInconclusive = 2,  ///< no verdict / outside supported class
    kPartial = 3,       ///< simulator overflow; partial results written
};

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "MGINF_OUT_DIR";
inline constexpr const char* kVersion = "0.1.0";

/// args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mginf::cli
