#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "codetrail/analytics/sessionize.hpp"
#include "codetrail/event/event.hpp"

namespace codetrail::analytics {

struct MetricsOptions {
  std::int64_t session_gap_seconds = kDefaultSessionGapSeconds;
  std::int64_t active_gap_cap_seconds = 120;
};

struct MetricsReport {
  std::string actor_id;
  std::optional<std::string> exercise_id;
  std::int64_t churn_lines = 0;
  std::int64_t net_lines = 0;
  double active_seconds = 0;
  std::map<DiagnosticLevel, std::uint64_t> diagnostics_by_level;  // every level present
  std::optional<double> time_to_first_clean_run_seconds;
  std::uint64_t run_count = 0;
  std::uint64_t submission_count = 0;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Progress metrics of one (actor, exercise) stream, seq-ordered.
///
/// churn: inserted plus deleted lines over every FileDiff hunk.
/// net: per file, replayed final line count minus its first snapshot's, summed.
/// active_seconds: consecutive-event gaps inside each session, each capped at
///   active_gap_cap_seconds. Heartbeats are left out: an idle editor still beats.
/// time_to_first_clean_run: from the first event to the first RunEnd with no
///   Error-level diagnostic since its RunStart; the exit code is not consulted.
/// run_count counts RunStart events.
///
/// Throws Error{UnsortedInput}, Error{InvalidArgument} for mixed actors, and
/// Error{BrokenChain} when a file's diff chain does not replay.
MetricsReport compute_metrics(std::span<const StoredEvent> events, const MetricsOptions& options = {});

/// The events that count as activity for sessions and active time.
std::vector<StoredEvent> activity_events(std::span<const StoredEvent> events);

using ErrorBucket = std::pair<std::string, std::uint64_t>;

/// Error-level diagnostics grouped by normalize_message(), most frequent first,
/// ties in ascending message order. top_n == 0 keeps every bucket.
std::vector<ErrorBucket> error_histogram(std::span<const StoredEvent> events, std::size_t top_n = 0);

}  // namespace codetrail::analytics
