#include "codetrail/analytics/report_format.hpp"

#include <iomanip>
#include <sstream>

namespace codetrail::analytics {

namespace {

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json quartiles_json(const std::optional<Quartiles>& q) {
  if (!q) return nullptr;
  return {{"q1", q->q1}, {"median", q->median}, {"q3", q->q3}};
}

std::string seconds_text(double s) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(1) << s << " s";
  return out.str();
}

std::string quartiles_text(const std::optional<Quartiles>& q) {
  if (!q) return "-";
  std::ostringstream out;
  out << q->q1 << " / " << q->median << " / " << q->q3;
  return out.str();
}

}  // namespace

json to_json(const MetricsReport& r) {
  json levels = json::object();
  for (const auto& [level, count] : r.diagnostics_by_level) levels[std::string(to_string(level))] = count;
  return {{"actor_id", r.actor_id},
          {"exercise_id", r.exercise_id ? json(*r.exercise_id) : json(nullptr)},
          {"churn_lines", r.churn_lines},
          {"net_lines", r.net_lines},
          {"active_seconds", r.active_seconds},
          {"diagnostics_by_level", levels},
          {"time_to_first_clean_run_seconds", optional_json(r.time_to_first_clean_run_seconds)},
          {"run_count", r.run_count},
          {"submission_count", r.submission_count}};
}

json to_json(const ClassReport& r) {
  json actors = json::array();
  for (const auto& m : r.actors) actors.push_back(to_json(m));
  json errors = json::array();
  for (const auto& [message, count] : r.top_error_messages) errors.push_back({{"message", message}, {"count", count}});
  return {{"exercise_id", r.exercise_id},
          {"actors", actors},
          {"top_error_messages", errors},
          {"active_seconds", quartiles_json(r.active_seconds)},
          {"churn_lines", quartiles_json(r.churn_lines)}};
}

json to_json(const RunDelta& d) {
  return {{"run_a", d.run_a},
          {"run_b", d.run_b},
          {"diagnostics_resolved", d.diagnostics_resolved},
          {"diagnostics_introduced", d.diagnostics_introduced},
          {"diagnostics_persisting", d.diagnostics_persisting}};
}

json to_json(const std::vector<Session>& sessions) {
  json out = json::array();
  for (const auto& s : sessions)
    out.push_back({{"actor_id", s.actor_id},
                   {"start_ts", s.start_ts.to_string()},
                   {"end_ts", s.end_ts.to_string()},
                   {"first_seq", s.first_seq},
                   {"last_seq", s.last_seq},
                   {"event_count", s.event_count},
                   {"files_touched", s.files_touched}});
  return out;
}

void print_student_report(std::ostream& out, const MetricsReport& r, const std::vector<Session>& sessions) {
  out << "actor          " << r.actor_id << '\n';
  out << "exercise       " << r.exercise_id.value_or("-") << '\n';
  out << "churn lines    " << r.churn_lines << '\n';
  out << "net lines      " << r.net_lines << '\n';
  out << "active time    " << seconds_text(r.active_seconds) << '\n';
  out << "sessions       " << sessions.size() << '\n';
  out << "runs           " << r.run_count << '\n';
  out << "submissions    " << r.submission_count << '\n';
  out << "first clean    "
      << (r.time_to_first_clean_run_seconds ? seconds_text(*r.time_to_first_clean_run_seconds) : "-") << '\n';
  out << "diagnostics   ";
  for (const auto& [level, count] : r.diagnostics_by_level) out << ' ' << to_string(level) << '=' << count;
  out << '\n';
}

void print_class_report(std::ostream& out, const ClassReport& r) {
  out << "exercise " << r.exercise_id << ", " << r.actors.size() << " actors\n\n";
  out << std::left << std::setw(24) << "actor" << std::right << std::setw(8) << "churn" << std::setw(8) << "net"
      << std::setw(12) << "active s" << std::setw(6) << "runs" << std::setw(8) << "errors" << '\n';
  for (const auto& m : r.actors)
    out << std::left << std::setw(24) << m.actor_id << std::right << std::setw(8) << m.churn_lines << std::setw(8)
        << m.net_lines << std::setw(12) << std::fixed << std::setprecision(1) << m.active_seconds << std::setw(6)
        << m.run_count << std::setw(8) << m.diagnostics_by_level.at(DiagnosticLevel::Error) << '\n';
  out.unsetf(std::ios::fixed);
  out << std::setprecision(6);
  out << "\nactive seconds q1/median/q3  " << quartiles_text(r.active_seconds) << '\n';
  out << "churn lines    q1/median/q3  " << quartiles_text(r.churn_lines) << '\n';
  out << "\ntop errors\n";
  if (r.top_error_messages.empty()) out << "  (none)\n";
  for (const auto& [message, count] : r.top_error_messages) out << std::setw(7) << count << "  " << message << '\n';
}

void print_run_delta(std::ostream& out, const RunDelta& d) {
  out << d.run_a << " -> " << d.run_b << '\n';
  for (const auto& m : d.diagnostics_resolved) out << "  - " << m << '\n';
  for (const auto& m : d.diagnostics_persisting) out << "  = " << m << '\n';
  for (const auto& m : d.diagnostics_introduced) out << "  + " << m << '\n';
}

}  // namespace codetrail::analytics
