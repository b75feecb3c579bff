#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "codetrail/event/event.hpp"

namespace codetrail {

/// Splits on `\n`. A text with n newlines always yields n + 1 pieces, so the
/// empty tail after a final newline is a piece of its own and joining the pieces
/// with `\n` restores the text byte-exactly.
std::vector<std::string> split_lines(std::string_view text);
std::string join_lines(const std::vector<std::string>& lines);

/// Minimal line-based edit script (shortest edit script, i.e. maximal common
/// subsequence of lines) turning `old_text` into `new_text`. Adjacent changes are
/// merged into one hunk; identical texts give no hunks.
std::vector<Hunk> compute_diff(std::string_view old_text, std::string_view new_text);

/// Replays hunks on `base_text`. Throws Error{PatchMismatch} when a hunk's deleted
/// lines are not present at its start line, or when the hunks are out of order.
std::string apply_diff(std::string_view base_text, const std::vector<Hunk>& hunks);

/// Lines inserted plus lines deleted.
std::uint64_t hunk_churn(const std::vector<Hunk>& hunks);

}  // namespace codetrail
