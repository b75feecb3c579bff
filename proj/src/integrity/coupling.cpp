#include "codetrail/integrity/coupling.hpp"

#include <algorithm>

#include "codetrail/error.hpp"

namespace codetrail::integrity {

namespace {

void require_sorted(std::span<const Timestamp> ts, const char* which) {
  if (!std::is_sorted(ts.begin(), ts.end()))
    throw Error(ErrorCode::UnsortedInput, std::string("edit times of ") + which + " are not client_ts-sorted");
}

double covered(std::span<const Timestamp> from, std::span<const Timestamp> to, std::int64_t window_ms) {
  std::size_t hits = 0;
  for (const Timestamp& t : from) {
    auto it = std::lower_bound(to.begin(), to.end(), t.plus_ms(-window_ms));
    if (it != to.end() && it->unix_ms() <= t.unix_ms() + window_ms) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(from.size());
}

}  // namespace

double temporal_coupling(std::span<const Timestamp> a, std::span<const Timestamp> b, std::int64_t window_seconds) {
  require_sorted(a, "a");
  require_sorted(b, "b");
  if (window_seconds < 0) throw Error(ErrorCode::InvalidArgument, "window_seconds must be >= 0");
  if (a.empty() || b.empty()) return 0.0;
  const std::int64_t window_ms = window_seconds * 1000;
  return (covered(a, b, window_ms) + covered(b, a, window_ms)) / 2.0;
}

std::vector<Timestamp> edit_times(std::span<const StoredEvent> events) {
  std::vector<Timestamp> out;
  for (const auto& s : events)
    if (s.event.kind == EventKind::FileDiff || s.event.kind == EventKind::FileSave) out.push_back(s.event.client_ts);
  return out;
}

double temporal_coupling(std::span<const StoredEvent> a, std::span<const StoredEvent> b, std::int64_t window_seconds) {
  const auto ta = edit_times(a);
  const auto tb = edit_times(b);
  return temporal_coupling(ta, tb, window_seconds);
}

}  // namespace codetrail::integrity
