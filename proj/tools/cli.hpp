#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace oadr::cli {

/// Runs one subcommand. Returns 0 on success, 1 on operation failure and 2 on
/// usage errors. Machine-readable summaries go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv);

}  // namespace oadr::cli
