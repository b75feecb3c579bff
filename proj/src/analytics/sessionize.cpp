#include "codetrail/analytics/sessionize.hpp"

#include "codetrail/error.hpp"

namespace codetrail::analytics {

void require_seq_order(std::span<const StoredEvent> events) {
  for (std::size_t i = 1; i < events.size(); ++i)
    if (events[i].seq <= events[i - 1].seq)
      throw Error(ErrorCode::UnsortedInput, "seq " + std::to_string(events[i].seq) + " follows seq " +
                                                std::to_string(events[i - 1].seq));
}

std::vector<Session> sessionize(std::span<const StoredEvent> events, std::int64_t gap_seconds) {
  if (gap_seconds < 0) throw Error(ErrorCode::InvalidArgument, "gap_seconds must be >= 0");
  require_seq_order(events);
  std::vector<Session> out;
  const std::int64_t gap_ms = gap_seconds * 1000;
  for (std::size_t i = 0; i < events.size(); ++i) {
    const Event& e = events[i].event;
    if (e.actor_id != events.front().event.actor_id)
      throw Error(ErrorCode::InvalidArgument, "sessionize got events of several actors");
    const bool split =
        i == 0 || e.client_ts.unix_ms() - events[i - 1].event.client_ts.unix_ms() > gap_ms;
    if (split) {
      Session s;
      s.actor_id = e.actor_id;
      s.start_ts = s.end_ts = e.client_ts;
      s.first_seq = events[i].seq;
      out.push_back(std::move(s));
    }
    Session& s = out.back();
    s.start_ts = std::min(s.start_ts, e.client_ts);
    s.end_ts = std::max(s.end_ts, e.client_ts);
    s.last_seq = events[i].seq;
    ++s.event_count;
    if (const std::string* f = payload_file(e.payload); f && !f->empty()) s.files_touched.insert(*f);
  }
  return out;
}

}  // namespace codetrail::analytics
