#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tlcg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomain = 1;
inline constexpr int kExitUsage = 2;

/// `args` excludes the program name. Reports go to `out` (or --out), errors to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace tlcg::cli
