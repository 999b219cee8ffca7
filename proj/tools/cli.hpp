#pragma once

#include <ostream>

namespace dimers::cli {

// exit status: 0 ok, 1 validation failed, 2 invalid input, 3 internal error
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dimers::cli
