#pragma once

#include <iosfwd>

namespace tscore::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kDataError = 1;
inline constexpr int kUsageError = 2;

// Runs one `tscore` invocation. Results go to `out` unless an output path
// is given; diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tscore::cli
