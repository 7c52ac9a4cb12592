#pragma once

namespace aau {

// Exit codes: 0 ok, 1 usage, 2 config, 3 data/schema, 4 numeric failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

/// Entry point shared by the binary and the in-process CLI tests.
int run_cli(int argc, const char* const* argv);

} // namespace aau
