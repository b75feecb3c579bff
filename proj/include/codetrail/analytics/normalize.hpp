#pragma once

#include <string>
#include <string_view>

namespace codetrail::analytics {

/// Buckets instance-specific diagnostic text: ASCII lowercase, then every quoted
/// identifier ('x', "x" or `x`, contents matching [A-Za-z_$][A-Za-z0-9_$]*)
/// becomes <id> inside its quotes, then every run of digits becomes `#`.
///
///   "Undefined variable 'total2' at line 14"  ->  "undefined variable '<id>' at line #"
std::string normalize_message(std::string_view message);

}  // namespace codetrail::analytics
