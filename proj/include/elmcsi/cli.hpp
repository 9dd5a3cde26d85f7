#pragma once

#include <iosfwd>

namespace elmcsi {

/// Entry point behind the `elmcsi` executable. Subcommands: sweep, overhead,
/// train, infer, record. Returns the process exit code.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace elmcsi
