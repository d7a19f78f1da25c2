#pragma once

#include <string>
#include <vector>

namespace alphascreen {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

// Entry point of the alphascreen command; returns the process exit code.
int run_cli(int argc, const char* const* argv);
// Same, with args excluding the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace alphascreen
