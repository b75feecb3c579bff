#include "codetrail/analytics/metrics.hpp"

#include <algorithm>

#include "codetrail/analytics/normalize.hpp"
#include "codetrail/error.hpp"
#include "codetrail/store/replay.hpp"

namespace codetrail::analytics {

std::vector<StoredEvent> activity_events(std::span<const StoredEvent> events) {
  std::vector<StoredEvent> out;
  out.reserve(events.size());
  for (const auto& s : events)
    if (s.event.kind != EventKind::Heartbeat) out.push_back(s);
  return out;
}

MetricsReport compute_metrics(std::span<const StoredEvent> events, const MetricsOptions& options) {
  require_seq_order(events);
  MetricsReport report;
  for (DiagnosticLevel level : kAllLevels) report.diagnostics_by_level[level] = 0;
  if (events.empty()) return report;
  report.actor_id = events.front().event.actor_id;
  report.exercise_id = events.front().event.exercise_id;

  store::FileReplay replay;
  std::optional<Seq> open_run;  // seq of the RunStart being watched
  std::string open_run_id;
  std::uint64_t errors_in_run = 0;
  const Timestamp origin = events.front().event.client_ts;

  for (const auto& stored : events) {
    const Event& e = stored.event;
    if (e.actor_id != report.actor_id)
      throw Error(ErrorCode::InvalidArgument, "compute_metrics got events of several actors");
    replay.apply(stored);
    if (const auto* diff = e.as<FileDiffPayload>()) {
      for (const auto& h : diff->hunks)
        report.churn_lines += static_cast<std::int64_t>(h.deleted.size() + h.inserted.size());
    } else if (const auto* diag = e.as<DiagnosticPayload>()) {
      ++report.diagnostics_by_level[diag->level];
      if (diag->level == DiagnosticLevel::Error) ++errors_in_run;
    } else if (const auto* start = e.as<RunStartPayload>()) {
      ++report.run_count;
      open_run = stored.seq;
      open_run_id = start->run_id;
      errors_in_run = 0;
    } else if (const auto* end = e.as<RunEndPayload>()) {
      if (open_run && end->run_id == open_run_id) {
        if (errors_in_run == 0 && !report.time_to_first_clean_run_seconds)
          report.time_to_first_clean_run_seconds = static_cast<double>(e.client_ts.unix_ms() - origin.unix_ms()) / 1000.0;
        open_run.reset();
      }
    } else if (e.kind == EventKind::Submission) {
      ++report.submission_count;
    }
  }

  for (const auto& key : replay.files()) {
    const std::string& text = replay.text(key);
    report.net_lines += static_cast<std::int64_t>(count_lines(text)) -
                        static_cast<std::int64_t>(replay.first_snapshot_lines(key).value_or(0));
  }

  const auto activity = activity_events(events);
  const auto sessions = sessionize(activity, options.session_gap_seconds);
  const std::int64_t cap_ms = options.active_gap_cap_seconds * 1000;
  std::int64_t active_ms = 0;
  std::size_t i = 0;
  for (const auto& session : sessions) {
    const std::size_t end = i + session.event_count;
    for (std::size_t j = i + 1; j < end; ++j) {
      const std::int64_t gap = activity[j].event.client_ts.unix_ms() - activity[j - 1].event.client_ts.unix_ms();
      active_ms += std::clamp<std::int64_t>(gap, 0, cap_ms);
    }
    i = end;
  }
  report.active_seconds = static_cast<double>(active_ms) / 1000.0;
  return report;
}

std::vector<ErrorBucket> error_histogram(std::span<const StoredEvent> events, std::size_t top_n) {
  std::map<std::string, std::uint64_t> counts;
  for (const auto& stored : events)
    if (const auto* diag = stored.event.as<DiagnosticPayload>(); diag && diag->level == DiagnosticLevel::Error)
      ++counts[normalize_message(diag->message)];
  std::vector<ErrorBucket> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const ErrorBucket& a, const ErrorBucket& b) { return a.second > b.second; });
  if (top_n != 0 && ranked.size() > top_n) ranked.resize(top_n);
  return ranked;
}

}  // namespace codetrail::analytics
