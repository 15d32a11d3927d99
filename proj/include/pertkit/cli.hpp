#pragma once

#include <iosfwd>

namespace pertkit::cli {

enum ExitCode : int {
  ok = 0,
  failure = 1,
  parse_error = 2,
  precondition = 3,
  resonance = 4,
  ill_conditioned = 5,
};

/// Entry point shared by the executable and the in-process tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pertkit::cli
