#pragma once

#include <optional>
#include <set>
#include <string>

#include "codetrail/event/event.hpp"

namespace codetrail::store {

/// Conjunctive filter over stored events. Unset fields match everything; both
/// ranges are half-open: client_ts in [from, to), seq in [from_seq, to_seq).
struct EventFilter {
  std::optional<std::string> actor_id;
  std::optional<std::string> workspace_id;
  std::optional<std::string> exercise_id;
  std::set<EventKind> kinds;  // empty: any kind
  std::optional<Timestamp> from;
  std::optional<Timestamp> to;
  std::optional<Seq> from_seq;
  std::optional<Seq> to_seq;

  bool matches(const StoredEvent& stored) const;
  /// Throws Error{InvalidArgument} when a range has its bounds reversed.
  void check() const;
};

}  // namespace codetrail::store
