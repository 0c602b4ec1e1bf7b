#pragma once

#include <iosfwd>

namespace dropshape {

/// Runs the dropshape command line. Returns 0 on success, 1 on usage errors, 2 on invalid
/// input and 3 when a numerical procedure fails. Artifacts go to --out or to `out`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dropshape
