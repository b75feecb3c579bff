#pragma once

#include <ostream>

namespace codetrail::cli {

/// Runs one `codetrail` invocation. Returns the process exit code: 0 on success,
/// 1 on a domain error, 2 on a usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace codetrail::cli
