#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fdpenv::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitData = 1;
inline constexpr int kExitUsage = 2;

/// Runs one `fdpenv` invocation. args excludes the program name. Returns the
/// exit code: 0 on success, 1 on data errors, 2 on usage errors.
int run_command(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace fdpenv::cli
