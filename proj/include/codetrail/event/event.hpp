#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "codetrail/event/timestamp.hpp"

namespace codetrail {

inline constexpr int kSchemaVersion = 1;

using Seq = std::uint64_t;

enum class EventKind {
  FileOpen,
  FileSnapshot,
  FileDiff,
  FileSave,
  Diagnostic,
  RunStart,
  RunEnd,
  Submission,
  Heartbeat,
};

inline constexpr EventKind kAllEventKinds[] = {
    EventKind::FileOpen, EventKind::FileSnapshot, EventKind::FileDiff,   EventKind::FileSave,  EventKind::Diagnostic,
    EventKind::RunStart, EventKind::RunEnd,       EventKind::Submission, EventKind::Heartbeat,
};

std::string_view to_string(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view name);

// Numeric order follows severity: Error > Warning > Info > Debug.
enum class DiagnosticLevel { Debug = 0, Info = 1, Warning = 2, Error = 3 };

inline constexpr DiagnosticLevel kAllLevels[] = {DiagnosticLevel::Error, DiagnosticLevel::Warning,
                                                 DiagnosticLevel::Info, DiagnosticLevel::Debug};

std::string_view to_string(DiagnosticLevel level);
std::optional<DiagnosticLevel> parse_diagnostic_level(std::string_view name);

/// One contiguous edit against a base text. `start_line` is 1-based in the base;
/// the deleted lines start there and the inserted lines take their place.
struct Hunk {
  std::uint32_t start_line = 1;
  std::vector<std::string> deleted;
  std::vector<std::string> inserted;

  friend bool operator==(const Hunk&, const Hunk&) = default;
};

struct FileOpenPayload {
  std::string file;
  friend bool operator==(const FileOpenPayload&, const FileOpenPayload&) = default;
};

struct FileSnapshotPayload {
  std::string file;
  std::string content;
  std::uint64_t line_count = 0;
  friend bool operator==(const FileSnapshotPayload&, const FileSnapshotPayload&) = default;
};

struct FileDiffPayload {
  std::string file;
  std::string base_event_id;
  std::vector<Hunk> hunks;
  friend bool operator==(const FileDiffPayload&, const FileDiffPayload&) = default;
};

struct FileSavePayload {
  std::string file;
  std::string content_sha256;
  std::uint64_t line_count = 0;
  friend bool operator==(const FileSavePayload&, const FileSavePayload&) = default;
};

struct DiagnosticPayload {
  DiagnosticLevel level = DiagnosticLevel::Error;
  std::string message;
  std::string file;
  std::optional<std::uint32_t> line;
  std::string source;
  friend bool operator==(const DiagnosticPayload&, const DiagnosticPayload&) = default;
};

struct RunStartPayload {
  std::string run_id;
  std::string command;
  friend bool operator==(const RunStartPayload&, const RunStartPayload&) = default;
};

struct RunEndPayload {
  std::string run_id;
  std::int64_t exit_code = 0;
  friend bool operator==(const RunEndPayload&, const RunEndPayload&) = default;
};

struct SubmissionPayload {
  std::vector<std::string> files;  // empty: every tracked file
  friend bool operator==(const SubmissionPayload&, const SubmissionPayload&) = default;
};

struct HeartbeatPayload {
  friend bool operator==(const HeartbeatPayload&, const HeartbeatPayload&) = default;
};

// Alternative order matches EventKind.
using Payload = std::variant<FileOpenPayload, FileSnapshotPayload, FileDiffPayload, FileSavePayload,
                             DiagnosticPayload, RunStartPayload, RunEndPayload, SubmissionPayload, HeartbeatPayload>;

EventKind kind_of(const Payload& payload);

/// The file a payload refers to, if the kind carries one.
const std::string* payload_file(const Payload& payload);

struct Event {
  std::string event_id;
  int schema_version = kSchemaVersion;
  EventKind kind = EventKind::Heartbeat;
  Timestamp client_ts;
  std::string actor_id;
  std::string workspace_id;
  std::optional<std::string> exercise_id;
  Payload payload = HeartbeatPayload{};

  template <class P>
  const P* as() const {
    return std::get_if<P>(&payload);
  }

  friend bool operator==(const Event&, const Event&) = default;
};

/// Server-side record: the event plus its authoritative position in the log.
struct StoredEvent {
  Event event;
  Seq seq = 0;
  Timestamp received_ts;

  friend bool operator==(const StoredEvent&, const StoredEvent&) = default;
};

struct EventHeader {
  Timestamp client_ts;
  std::string actor_id;
  std::string workspace_id;
  std::optional<std::string> exercise_id;
};

/// Builds an event whose kind follows the payload and whose event_id is the
/// content hash of its canonical form.
Event make_event(const EventHeader& header, Payload payload);

/// Recomputes and assigns event_id in place.
void seal_event_id(Event& event);

bool is_valid_actor_id(std::string_view id);

/// Number of lines in a text: `\n` count, plus one for a non-empty unterminated tail.
std::uint64_t count_lines(std::string_view text);

/// `\r\n` and lone `\r` become `\n`.
std::string normalize_line_endings(std::string_view text);

bool is_valid_utf8(std::string_view bytes);

}  // namespace codetrail
