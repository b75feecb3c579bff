#include "codetrail/event/validate.hpp"

#include <algorithm>
#include <array>

#include "codetrail/error.hpp"
#include "codetrail/event/canonical.hpp"
#include "codetrail/event/hash.hpp"

namespace codetrail {

namespace {

constexpr std::array<std::string_view, 28> kViolationNames = {
    "MalformedJson",   "MissingField",     "WrongType",       "UnknownField",     "UnsupportedSchemaVersion",
    "UnknownKind",     "BadTimestamp",     "PayloadMismatch", "BadEventId",       "IdMismatch",
    "BadActorId",      "EmptyWorkspace",   "EmptyExercise",   "BadPath",          "PathEscape",
    "EmptyMessage",    "BadLine",          "LineCountMismatch", "EmptyHunkList",  "EmptyHunk",
    "BadStartLine",    "UnorderedHunks",   "OverlappingHunks", "BadBaseEventId",  "BadDigest",
    "EmptyRunId",      "InvalidUtf8",      "ActorScope",
};

void check_file(std::string_view path, std::vector<Violation>& out) {
  auto found = validate_relative_path(path);
  out.insert(out.end(), found.begin(), found.end());
}

struct PayloadChecker {
  std::vector<Violation>& out;

  void operator()(const FileOpenPayload& p) const { check_file(p.file, out); }
  void operator()(const FileSnapshotPayload& p) const {
    check_file(p.file, out);
    if (count_lines(p.content) != p.line_count)
      out.push_back({ViolationCode::LineCountMismatch, "line_count " + std::to_string(p.line_count) + " but content has " +
                                                           std::to_string(count_lines(p.content))});
  }
  void operator()(const FileDiffPayload& p) const {
    check_file(p.file, out);
    if (!is_lower_hex_digest(p.base_event_id)) out.push_back({ViolationCode::BadBaseEventId, p.base_event_id});
    if (p.hunks.empty()) out.push_back({ViolationCode::EmptyHunkList, "a diff event needs at least one hunk"});
    auto hunk_violations = validate_hunks(p.hunks);
    out.insert(out.end(), hunk_violations.begin(), hunk_violations.end());
  }
  void operator()(const FileSavePayload& p) const {
    check_file(p.file, out);
    if (!is_lower_hex_digest(p.content_sha256)) out.push_back({ViolationCode::BadDigest, p.content_sha256});
  }
  void operator()(const DiagnosticPayload& p) const {
    check_file(p.file, out);
    if (p.message.empty()) out.push_back({ViolationCode::EmptyMessage, "diagnostic message is empty"});
    if (p.line && *p.line < 1) out.push_back({ViolationCode::BadLine, "line must be >= 1"});
  }
  void operator()(const RunStartPayload& p) const {
    if (p.run_id.empty()) out.push_back({ViolationCode::EmptyRunId, "run_id is empty"});
  }
  void operator()(const RunEndPayload& p) const {
    if (p.run_id.empty()) out.push_back({ViolationCode::EmptyRunId, "run_id is empty"});
  }
  void operator()(const SubmissionPayload& p) const {
    for (const auto& f : p.files) check_file(f, out);
  }
  void operator()(const HeartbeatPayload&) const {}
};

}  // namespace

std::string_view to_string(ViolationCode code) { return kViolationNames[static_cast<std::size_t>(code)]; }

bool has_violation(const std::vector<Violation>& violations, ViolationCode code) {
  return std::any_of(violations.begin(), violations.end(), [code](const Violation& v) { return v.code == code; });
}

std::vector<Violation> validate_relative_path(std::string_view path) {
  std::vector<Violation> out;
  const std::string p(path);
  if (path.empty()) {
    out.push_back({ViolationCode::BadPath, "empty path"});
    return out;
  }
  if (path.front() == '/' || (path.size() >= 2 && path[1] == ':')) {
    out.push_back({ViolationCode::PathEscape, "absolute path: " + p});
    return out;
  }
  if (path.find('\\') != std::string_view::npos || path.find('\0') != std::string_view::npos) {
    out.push_back({ViolationCode::BadPath, "path must use '/' separators: " + p});
    return out;
  }
  std::size_t start = 0;
  while (start <= path.size()) {
    const std::size_t end = std::min(path.find('/', start), path.size());
    const std::string_view segment = path.substr(start, end - start);
    if (segment == "..") {
      out.push_back({ViolationCode::PathEscape, "'..' segment in " + p});
      return out;
    }
    if (segment.empty() || segment == ".") {
      out.push_back({ViolationCode::BadPath, "empty or '.' segment in " + p});
      return out;
    }
    start = end + 1;
  }
  return out;
}

std::vector<Violation> validate_hunks(const std::vector<Hunk>& hunks) {
  std::vector<Violation> out;
  for (std::size_t i = 0; i < hunks.size(); ++i) {
    const Hunk& h = hunks[i];
    if (h.start_line < 1) out.push_back({ViolationCode::BadStartLine, "hunk " + std::to_string(i) + " start_line 0"});
    if (h.deleted.empty() && h.inserted.empty())
      out.push_back({ViolationCode::EmptyHunk, "hunk " + std::to_string(i) + " changes nothing"});
    if (i == 0) continue;
    const Hunk& prev = hunks[i - 1];
    if (h.start_line < prev.start_line) {
      out.push_back({ViolationCode::UnorderedHunks, "hunk " + std::to_string(i) + " starts before its predecessor"});
      continue;
    }
    // The previous hunk occupies [start, start + |deleted|); a pure insertion
    // occupies its start position.
    const std::uint64_t prev_end = static_cast<std::uint64_t>(prev.start_line) + prev.deleted.size();
    if (h.start_line < prev_end || (prev.deleted.empty() && h.start_line == prev.start_line))
      out.push_back({ViolationCode::OverlappingHunks, "hunk " + std::to_string(i) + " overlaps hunk " + std::to_string(i - 1)});
  }
  return out;
}

std::vector<Violation> validate(const Event& e) {
  std::vector<Violation> out;
  if (e.schema_version != kSchemaVersion)
    out.push_back({ViolationCode::UnsupportedSchemaVersion, std::to_string(e.schema_version)});
  if (kind_of(e.payload) != e.kind)
    out.push_back({ViolationCode::PayloadMismatch, "kind " + std::string(to_string(e.kind)) + " carries a " +
                                                       std::string(to_string(kind_of(e.payload))) + " payload"});
  if (!is_valid_actor_id(e.actor_id)) out.push_back({ViolationCode::BadActorId, e.actor_id});
  if (e.workspace_id.empty()) out.push_back({ViolationCode::EmptyWorkspace, "workspace_id is empty"});
  if (e.exercise_id && e.exercise_id->empty()) out.push_back({ViolationCode::EmptyExercise, "exercise_id is empty"});
  std::visit(PayloadChecker{out}, e.payload);

  std::optional<std::string> digest;
  try {
    digest = compute_event_id(canonicalize(e));
  } catch (const Error&) {
    out.push_back({ViolationCode::InvalidUtf8, "event contains invalid UTF-8"});
  }
  if (!is_lower_hex_digest(e.event_id))
    out.push_back({ViolationCode::BadEventId, "event_id must be 64 lowercase hex chars"});
  else if (digest && *digest != e.event_id)
    out.push_back({ViolationCode::IdMismatch, "event_id does not match the canonical digest"});
  return out;
}

}  // namespace codetrail
