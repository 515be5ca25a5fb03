#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace retina::cli {

inline constexpr std::string_view kVersion = "0.1.0";

/// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Same, with the program name implied.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "# retina <version> seed=<seed>"
std::string provenance_line(std::uint64_t seed);

}  // namespace retina::cli
