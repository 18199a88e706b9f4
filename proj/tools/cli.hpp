#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lancekit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitData = 2;
inline constexpr int kExitService = 3;

/// Runs one command line (without the program name) and returns its exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lancekit::cli
