#include "codetrail/capture/glob.hpp"

namespace codetrail::capture {

namespace {

std::vector<std::string_view> segments(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t slash = std::min(s.find('/', start), s.size());
    if (slash > start) out.push_back(s.substr(start, slash - start));
    start = slash + 1;
  }
  return out;
}

// Single segment with `*` and `?`.
bool match_segment(std::string_view p, std::string_view s) {
  std::size_t pi = 0, si = 0, star = std::string_view::npos, mark = 0;
  while (si < s.size()) {
    if (pi < p.size() && (p[pi] == '?' || p[pi] == s[si])) {
      ++pi, ++si;
    } else if (pi < p.size() && p[pi] == '*') {
      star = pi++;
      mark = si;
    } else if (star != std::string_view::npos) {
      pi = star + 1;
      si = ++mark;
    } else {
      return false;
    }
  }
  while (pi < p.size() && p[pi] == '*') ++pi;
  return pi == p.size();
}

bool match_segments(const std::vector<std::string_view>& p, std::size_t pi, const std::vector<std::string_view>& s,
                    std::size_t si) {
  while (pi < p.size()) {
    if (p[pi] == "**") {
      for (std::size_t k = si; k <= s.size(); ++k)
        if (match_segments(p, pi + 1, s, k)) return true;
      return false;
    }
    if (si >= s.size() || !match_segment(p[pi], s[si])) return false;
    ++pi, ++si;
  }
  return si == s.size();
}

}  // namespace

bool glob_match(std::string_view pattern, std::string_view path) {
  const auto p = segments(pattern);
  const auto s = segments(path);
  if (pattern.find('/') == std::string_view::npos) {
    for (std::size_t start = 0; start < s.size(); ++start)
      if (match_segments(p, 0, s, start)) return true;
    return false;
  }
  return match_segments(p, 0, s, 0);
}

bool glob_excludes_dir(std::string_view pattern, std::string_view dir) {
  constexpr std::string_view suffix = "/**";
  if (pattern.size() <= suffix.size() || pattern.substr(pattern.size() - suffix.size()) != suffix) return false;
  // Anchored, like the full pattern it came from.
  return match_segments(segments(pattern.substr(0, pattern.size() - suffix.size())), 0, segments(dir), 0);
}

bool any_match(const std::vector<std::string>& patterns, std::string_view path) {
  for (const auto& p : patterns)
    if (glob_match(p, path)) return true;
  return false;
}

}  // namespace codetrail::capture
