#pragma once

#include <iosfwd>

namespace hiernet {

/// Entry point of the hiernet command line. Returns 0 on success, 2 for
/// bad input or usage, 3 for internal failures. Tables without an --out
/// file go to `out`; messages go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace hiernet
