#pragma once

#include <ostream>
#include <vector>

#include "codetrail/analytics/class_report.hpp"
#include "codetrail/analytics/runs.hpp"
#include "codetrail/analytics/sessionize.hpp"
#include "codetrail/event/canonical.hpp"

namespace codetrail::analytics {

// JSON shapes for --json output. Serialize with canonical_dump() for byte-stable text.
json to_json(const MetricsReport& report);
json to_json(const ClassReport& report);
json to_json(const RunDelta& delta);
json to_json(const std::vector<Session>& sessions);

void print_student_report(std::ostream& out, const MetricsReport& report, const std::vector<Session>& sessions);
void print_class_report(std::ostream& out, const ClassReport& report);
void print_run_delta(std::ostream& out, const RunDelta& delta);

}  // namespace codetrail::analytics
