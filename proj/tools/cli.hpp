#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lnskd {

/// Parses `args` (without the program name), runs the chosen subcommand and
/// returns the process exit status. Diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lnskd
