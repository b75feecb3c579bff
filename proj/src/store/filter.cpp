#include "codetrail/store/filter.hpp"

#include "codetrail/error.hpp"

namespace codetrail::store {

bool EventFilter::matches(const StoredEvent& stored) const {
  const Event& e = stored.event;
  if (actor_id && e.actor_id != *actor_id) return false;
  if (workspace_id && e.workspace_id != *workspace_id) return false;
  if (exercise_id && e.exercise_id != *exercise_id) return false;
  if (!kinds.empty() && !kinds.count(e.kind)) return false;
  if (from && e.client_ts < *from) return false;
  if (to && !(e.client_ts < *to)) return false;
  if (from_seq && stored.seq < *from_seq) return false;
  if (to_seq && !(stored.seq < *to_seq)) return false;
  return true;
}

void EventFilter::check() const {
  if (from && to && *to < *from) throw Error(ErrorCode::InvalidArgument, "client_ts range ends before it starts");
  if (from_seq && to_seq && *to_seq < *from_seq) throw Error(ErrorCode::InvalidArgument, "seq range ends before it starts");
}

}  // namespace codetrail::store
