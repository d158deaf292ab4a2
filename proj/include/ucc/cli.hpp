#pragma once

#include <string>
#include <vector>

namespace ucc::cli {

// Exit codes; per-item failures still write full output documents.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitItemErrors = 3;

/// Runs one subcommand. `args` excludes the program name.
int execute(const std::vector<std::string>& args);

} // namespace ucc::cli
