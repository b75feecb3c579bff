#include "codetrail/analytics/runs.hpp"

#include <algorithm>
#include <iterator>

#include "codetrail/analytics/normalize.hpp"
#include "codetrail/error.hpp"

namespace codetrail::analytics {

namespace {

struct Window {
  std::string actor_id;
  Seq start = 0;
  Seq end = 0;
};

Window find_run(std::span<const StoredEvent> events, const std::string& run_id) {
  const StoredEvent* start = nullptr;
  for (const auto& s : events) {
    if (!start) {
      if (const auto* p = s.event.as<RunStartPayload>(); p && p->run_id == run_id) start = &s;
    } else if (const auto* p = s.event.as<RunEndPayload>();
               p && p->run_id == run_id && s.event.actor_id == start->event.actor_id) {
      return {start->event.actor_id, start->seq, s.seq};
    }
  }
  throw Error(ErrorCode::NoSuchRun, start ? "run " + run_id + " never ended" : "no run " + run_id);
}

std::set<std::string> diagnostics_in(std::span<const StoredEvent> events, const Window& w) {
  std::set<std::string> out;
  for (const auto& s : events) {
    if (s.seq < w.start || s.seq > w.end || s.event.actor_id != w.actor_id) continue;
    if (const auto* d = s.event.as<DiagnosticPayload>()) out.insert(normalize_message(d->message));
  }
  return out;
}

}  // namespace

std::set<std::string> run_diagnostics(std::span<const StoredEvent> events, const std::string& run_id) {
  return diagnostics_in(events, find_run(events, run_id));
}

RunDelta compare_runs(std::span<const StoredEvent> events, const std::string& run_a, const std::string& run_b) {
  const Window wa = find_run(events, run_a);
  const Window wb = find_run(events, run_b);
  if (wa.actor_id != wb.actor_id)
    throw Error(ErrorCode::InvalidArgument, "runs " + run_a + " and " + run_b + " belong to different actors");
  const auto a = diagnostics_in(events, wa);
  const auto b = diagnostics_in(events, wb);
  RunDelta delta{run_a, run_b, {}, {}, {}};
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::inserter(delta.diagnostics_resolved, delta.diagnostics_resolved.end()));
  std::set_difference(b.begin(), b.end(), a.begin(), a.end(),
                      std::inserter(delta.diagnostics_introduced, delta.diagnostics_introduced.end()));
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::inserter(delta.diagnostics_persisting, delta.diagnostics_persisting.end()));
  return delta;
}

}  // namespace codetrail::analytics
