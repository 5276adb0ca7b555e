#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace modattach {

/// Entry point for the `modattach` tool; `args` excludes the program name.
/// Returns the process exit status. Failures print a single
/// `error: <code>: <detail>` line to `err`.
int run_cli(std::vector<std::string> args, std::istream& in, std::ostream& out,
            std::ostream& err);

}  // namespace modattach
