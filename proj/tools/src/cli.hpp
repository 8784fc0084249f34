#pragma once

#include <ostream>

namespace gridlab::cli {

// Exit codes: 0 success, 1 configuration or usage error (the message names the
// offending key), 2 numerical failure (the message names the module and a
// remedy).
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitNumerical = 2;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gridlab::cli
