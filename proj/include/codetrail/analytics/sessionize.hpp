#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "codetrail/event/event.hpp"

namespace codetrail::analytics {

inline constexpr std::int64_t kDefaultSessionGapSeconds = 900;

struct Session {
  std::string actor_id;
  Timestamp start_ts;
  Timestamp end_ts;
  Seq first_seq = 0;
  Seq last_seq = 0;
  std::uint64_t event_count = 0;
  std::set<std::string> files_touched;

  friend bool operator==(const Session&, const Session&) = default;
};

/// Splits one actor's seq-ordered events into sessions: a client_ts gap strictly
/// greater than `gap_seconds` between consecutive events starts a new one. Gaps
/// are measured in seq order, so a clock that steps backwards never splits.
///
/// Throws Error{UnsortedInput} if seqs are not strictly increasing and
/// Error{InvalidArgument} if the events span several actors.
std::vector<Session> sessionize(std::span<const StoredEvent> events,
                                std::int64_t gap_seconds = kDefaultSessionGapSeconds);

/// Throws Error{UnsortedInput} unless seqs strictly increase.
void require_seq_order(std::span<const StoredEvent> events);

}  // namespace codetrail::analytics
