#pragma once

#include <iosfwd>

namespace skiprun::cli {

// Exit codes: 0 success, 1 I/O failure, 2 config/parse failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitConfig = 2;

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace skiprun::cli
