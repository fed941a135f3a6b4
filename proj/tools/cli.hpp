#pragma once

#include <ostream>

namespace riesz::cli {

// Runs one subcommand. Returns 0 when every asserted check passed, 1 when one
// failed and 2 on usage or input errors.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace riesz::cli
