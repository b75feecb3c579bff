#include "codetrail/analytics/class_report.hpp"

#include <algorithm>
#include <map>

namespace codetrail::analytics {

std::optional<Quartiles> nearest_rank_quartiles(std::vector<double> values) {
  if (values.empty()) return std::nullopt;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  // rank = ceil(p·N), computed in integers to stay exact: ceil(k·N / 4).
  auto at = [&](std::size_t k) { return values[std::max<std::size_t>(1, (k * n + 3) / 4) - 1]; };
  return Quartiles{at(1), at(2), at(3)};
}

ClassReport class_report(std::span<const StoredEvent> events, const std::string& exercise_id, std::size_t top_n,
                         const MetricsOptions& options) {
  require_seq_order(events);
  ClassReport report;
  report.exercise_id = exercise_id;
  std::map<std::string, std::vector<StoredEvent>> by_actor;
  std::vector<StoredEvent> tagged;
  for (const auto& s : events) {
    if (s.event.exercise_id != exercise_id) continue;
    by_actor[s.event.actor_id].push_back(s);
    tagged.push_back(s);
  }
  std::vector<double> active, churn;
  for (const auto& [actor, stream] : by_actor) {
    report.actors.push_back(compute_metrics(stream, options));
    active.push_back(report.actors.back().active_seconds);
    churn.push_back(static_cast<double>(report.actors.back().churn_lines));
  }
  report.top_error_messages = error_histogram(tagged, top_n);
  report.active_seconds = nearest_rank_quartiles(std::move(active));
  report.churn_lines = nearest_rank_quartiles(std::move(churn));
  return report;
}

}  // namespace codetrail::analytics
