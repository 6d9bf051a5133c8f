#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace semlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitContract = 3;
inline constexpr int kExitInternal = 4;

/// Runs one command line (without the program name). Results go to `out`;
/// failures print a single JSON object on `err` and return a nonzero code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace semlab::cli
