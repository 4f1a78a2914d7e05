#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace physgen::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitPartial = 2;

/// Entry point of the `physgen` tool. `args` excludes the program name.
/// Returns 0 on success, 1 on invalid input or any other failure, 2 when
/// some generated samples failed.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string version();

}  // namespace physgen::cli
