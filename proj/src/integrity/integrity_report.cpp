#include "codetrail/integrity/integrity_report.hpp"

#include <algorithm>
#include <iomanip>
#include <set>

#include "codetrail/error.hpp"
#include "codetrail/store/replay.hpp"

namespace codetrail::integrity {

std::string submission_text(std::span<const StoredEvent> events) {
  std::size_t cut = events.size();
  const SubmissionPayload* submitted = nullptr;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (const auto* s = events[i].event.as<SubmissionPayload>()) {
      cut = i + 1;
      submitted = s;
    }
  }
  store::FileReplay replay;
  for (std::size_t i = 0; i < cut; ++i) replay.apply(events[i]);
  std::set<std::string> wanted;
  if (submitted) wanted.insert(submitted->files.begin(), submitted->files.end());

  std::vector<store::FileKey> keys = replay.files();
  std::sort(keys.begin(), keys.end(), [](const store::FileKey& a, const store::FileKey& b) {
    return std::tie(a.file, a.workspace_id) < std::tie(b.file, b.workspace_id);
  });
  std::string out;
  for (const auto& key : keys) {
    if (!wanted.empty() && !wanted.count(key.file)) continue;
    const std::string& text = replay.text(key);
    if (text.empty()) continue;
    if (!out.empty()) out += '\n';
    out += text;
  }
  return out;
}

IntegrityReport integrity_report(std::span<const StoredEvent> events, const std::string& exercise_id,
                                 const LanguageProfile& profile, const IntegrityOptions& options) {
  IntegrityReport report;
  report.exercise_id = exercise_id;
  report.language_profile = profile.name;
  report.options = options;

  std::map<std::string, std::vector<StoredEvent>> by_actor;
  for (const auto& s : events)
    if (s.event.exercise_id == exercise_id) by_actor[s.event.actor_id].push_back(s);

  struct Profile {
    std::string actor;
    FingerprintSet prints;
    std::vector<Timestamp> edits;
  };
  std::vector<Profile> actors;
  for (const auto& [actor, stream] : by_actor) {
    try {
      Profile p{actor, fingerprint(normalize_tokens(submission_text(stream), profile), options.k, options.w),
                edit_times(stream)};
      std::sort(p.edits.begin(), p.edits.end());
      actors.push_back(std::move(p));
    } catch (const Error& err) {
      if (err.code() != ErrorCode::BrokenChain && err.code() != ErrorCode::NoSuchFile) throw;
      report.skipped.push_back({actor, err.what()});
    }
  }

  for (std::size_t i = 0; i < actors.size(); ++i) {
    for (std::size_t j = i + 1; j < actors.size(); ++j) {
      PairScore s;
      s.actor_a = actors[i].actor;
      s.actor_b = actors[j].actor;
      s.content_similarity = content_similarity(actors[i].prints, actors[j].prints);
      s.temporal_coupling = temporal_coupling(actors[i].edits, actors[j].edits, options.window_seconds);
      s.flagged = s.content_similarity >= options.sim_threshold && s.temporal_coupling >= options.coupling_threshold;
      report.pairs.push_back(std::move(s));
    }
  }
  std::stable_sort(report.pairs.begin(), report.pairs.end(), [](const PairScore& a, const PairScore& b) {
    if (a.content_similarity != b.content_similarity) return a.content_similarity > b.content_similarity;
    return a.temporal_coupling > b.temporal_coupling;
  });
  return report;
}

json to_json(const IntegrityReport& r) {
  json pairs = json::array();
  for (const auto& p : r.pairs)
    pairs.push_back({{"actor_a", p.actor_a},
                     {"actor_b", p.actor_b},
                     {"content_similarity", p.content_similarity},
                     {"temporal_coupling", p.temporal_coupling},
                     {"flagged", p.flagged}});
  json skipped = json::array();
  for (const auto& s : r.skipped) skipped.push_back({{"actor_id", s.actor_id}, {"reason", s.reason}});
  return {{"label", r.label},
          {"exercise_id", r.exercise_id},
          {"language_profile", r.language_profile},
          {"thresholds", {{"sim", r.options.sim_threshold}, {"coupling", r.options.coupling_threshold}}},
          {"window_seconds", r.options.window_seconds},
          {"k", r.options.k},
          {"w", r.options.w},
          {"pairs", pairs},
          {"skipped", skipped}};
}

void print_integrity_report(std::ostream& out, const IntegrityReport& r) {
  out << "integrity " << r.label << ": exercise " << r.exercise_id << ", profile " << r.language_profile << '\n';
  out << "flag when similarity >= " << r.options.sim_threshold << " and coupling >= " << r.options.coupling_threshold
      << " (window " << r.options.window_seconds << " s)\n";
  out << "These are not verdicts; review the underlying code before drawing conclusions.\n\n";
  out << std::left << std::setw(20) << "actor a" << std::setw(20) << "actor b" << std::right << std::setw(12)
      << "similarity" << std::setw(10) << "coupling" << "  flag\n";
  out << std::fixed << std::setprecision(3);
  for (const auto& p : r.pairs)
    out << std::left << std::setw(20) << p.actor_a << std::setw(20) << p.actor_b << std::right << std::setw(12)
        << p.content_similarity << std::setw(10) << p.temporal_coupling << (p.flagged ? "  *" : "") << '\n';
  out.unsetf(std::ios::fixed);
  if (r.pairs.empty()) out << "(fewer than two actors)\n";
  for (const auto& s : r.skipped) out << "skipped " << s.actor_id << ": " << s.reason << '\n';
}

}  // namespace codetrail::integrity
