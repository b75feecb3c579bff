#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "codetrail/analytics/metrics.hpp"

namespace codetrail::analytics {

struct Quartiles {
  double q1 = 0;
  double median = 0;
  double q3 = 0;
  friend bool operator==(const Quartiles&, const Quartiles&) = default;
};

/// Nearest-rank: the p-quantile of N sorted values is the value at rank ceil(p·N)
/// (1-based). nullopt for no values.
std::optional<Quartiles> nearest_rank_quartiles(std::vector<double> values);

struct ClassReport {
  std::string exercise_id;
  std::vector<MetricsReport> actors;  // ascending actor_id
  std::vector<ErrorBucket> top_error_messages;
  std::optional<Quartiles> active_seconds;
  std::optional<Quartiles> churn_lines;

  friend bool operator==(const ClassReport&, const ClassReport&) = default;
};

/// Per-actor metrics and a shared error histogram over the events tagged with
/// `exercise_id`. `events` must be seq-ordered.
ClassReport class_report(std::span<const StoredEvent> events, const std::string& exercise_id, std::size_t top_n,
                         const MetricsOptions& options = {});

}  // namespace codetrail::analytics
