#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace affineopt::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// Entry point shared by the executable and the tests. args excludes argv[0].
int run(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace affineopt::cli
