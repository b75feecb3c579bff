#pragma once

#include <set>
#include <span>
#include <string>

#include "codetrail/event/event.hpp"

namespace codetrail::analytics {

struct RunDelta {
  std::string run_a;
  std::string run_b;
  std::set<std::string> diagnostics_resolved;    // in a only
  std::set<std::string> diagnostics_introduced;  // in b only
  std::set<std::string> diagnostics_persisting;  // in both

  friend bool operator==(const RunDelta&, const RunDelta&) = default;
};

/// Normalized messages of every diagnostic, any level, the run's actor logged
/// between its RunStart and RunEnd (by seq; first occurrence of the run_id).
/// Throws Error{NoSuchRun}.
std::set<std::string> run_diagnostics(std::span<const StoredEvent> events, const std::string& run_id);

/// Throws Error{NoSuchRun}, or Error{InvalidArgument} when the runs belong to
/// different actors.
RunDelta compare_runs(std::span<const StoredEvent> events, const std::string& run_a, const std::string& run_b);

}  // namespace codetrail::analytics
