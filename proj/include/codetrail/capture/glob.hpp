#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace codetrail::capture {

/// Glob match against a workspace-relative path using `/` separators.
///
///  - `*` and `?` never cross a `/`; `**` as a whole segment spans any number of
///    segments, including none.
///  - A pattern without `/` is matched against every suffix of segments, so `*.o`
///    matches `a/b/c.o` (gitignore-style basename rule).
bool glob_match(std::string_view pattern, std::string_view path);

/// True when every path below `dir` is excluded by some pattern (`X/**` style),
/// which lets the walker skip the whole directory.
bool glob_excludes_dir(std::string_view pattern, std::string_view dir);

bool any_match(const std::vector<std::string>& patterns, std::string_view path);

}  // namespace codetrail::capture
