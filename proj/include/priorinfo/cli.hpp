#pragma once

#include <iosfwd>

namespace priorinfo {

/// Runs one command line. Returns 0 on success, 1 on a validation error and 2
/// when a numerical routine fails.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace priorinfo
