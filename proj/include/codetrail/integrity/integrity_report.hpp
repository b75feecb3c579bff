#pragma once

#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "codetrail/event/canonical.hpp"
#include "codetrail/integrity/coupling.hpp"
#include "codetrail/integrity/fingerprint.hpp"

namespace codetrail::integrity {

inline constexpr std::string_view kReportLabel = "signals for human review";

struct IntegrityOptions {
  double sim_threshold = 0.5;
  double coupling_threshold = 0.6;
  std::int64_t window_seconds = kDefaultCouplingWindowSeconds;
  std::size_t k = kDefaultK;
  std::size_t w = kDefaultW;
};

struct PairScore {
  std::string actor_a;  // actor_a < actor_b
  std::string actor_b;
  double content_similarity = 0;
  double temporal_coupling = 0;
  bool flagged = false;
  friend bool operator==(const PairScore&, const PairScore&) = default;
};

struct SkippedActor {
  std::string actor_id;
  std::string reason;
  friend bool operator==(const SkippedActor&, const SkippedActor&) = default;
};

struct IntegrityReport {
  std::string label{kReportLabel};
  std::string exercise_id;
  std::string language_profile;
  IntegrityOptions options;
  std::vector<PairScore> pairs;  // content_similarity descending
  std::vector<SkippedActor> skipped;
};

/// The text an actor handed in: every file replayed up to their last Submission
/// (only the listed files when it names any), or to their last event when they
/// never submitted. Files are joined in path order. Throws Error{BrokenChain}.
std::string submission_text(std::span<const StoredEvent> actor_events);

/// Scores every pair of actors with events tagged `exercise_id`. A pair is
/// flagged only when both scores reach their thresholds. Actors whose files do
/// not replay are skipped and listed. `events` must be seq-ordered.
IntegrityReport integrity_report(std::span<const StoredEvent> events, const std::string& exercise_id,
                                 const LanguageProfile& profile, const IntegrityOptions& options = {});

json to_json(const IntegrityReport& report);
void print_integrity_report(std::ostream& out, const IntegrityReport& report);

}  // namespace codetrail::integrity
