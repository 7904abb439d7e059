#pragma once

#include <iosfwd>

namespace proverb::cli {

// Entry point behind the proverb-ground binary. Returns the process exit
// code: 0 success, 1 validation/usage error, 2 provider or IO failure.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace proverb::cli
