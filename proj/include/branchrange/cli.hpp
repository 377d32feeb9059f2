#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "branchrange/error.hpp"

namespace branchrange::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitEmptyMask = 3;
inline constexpr int kExitNoValidDepths = 4;
inline constexpr int kExitAllScenesFailed = 5;

int exit_code_for(ErrorKind kind);

/// Entry point behind the `branchrange` executable. `args` excludes the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace branchrange::cli
