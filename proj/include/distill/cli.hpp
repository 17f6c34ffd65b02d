#pragma once

namespace distill {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;

// Entry point of the `distill` tool: gen | select | eval | report.
int cli_main(int argc, const char* const* argv);

}  // namespace distill
