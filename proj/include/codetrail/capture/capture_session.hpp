#pragma once

#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "codetrail/capture/spool.hpp"
#include "codetrail/capture/watch_config.hpp"
#include "codetrail/event/canonical.hpp"
#include "codetrail/event/event.hpp"

namespace codetrail::capture {

/// Marker the editor extension drops in a workspace it is capturing; the file
/// watcher refuses to run alongside it.
inline constexpr const char* kExtensionMarker = ".codetrail-extension";

using Clock = std::function<Timestamp()>;

struct FileIoError {
  std::string file;
  std::string message;
};

/// Builds the event for an inbox drop `{"kind", "payload", "client_ts"?}` under the
/// config's actor, workspace and exercise. Only Diagnostic, RunStart, RunEnd,
/// Submission and FileOpen may be pushed. Throws Error{MalformedEvent}.
Event event_from_drop(const json& drop, const WatchConfig& config, Timestamp now);

/// The capture loop body: each tick() polls the workspace and turns what changed
/// into events.
///
/// Per file: a FileSnapshot on first sight; afterwards changes are coalesced until
/// the file has been quiet for `debounce_ms` (or has been changing for five debounce
/// windows), then one FileDiff against the last emitted text is followed by a
/// FileSave. After every `snapshot_every` diffs a fresh FileSnapshot is emitted.
/// A deleted file becomes a diff to the empty text. Heartbeats are emitted every
/// `heartbeat_ms`.
///
/// Events other than file events (diagnostics, runs, submissions) arrive through
/// record() or as JSON files dropped in `<spool_dir>/inbox/`.
///
/// Every event goes to the spool; while the spool refuses appends, events wait in a
/// bounded memory buffer and are retried on the next tick.
class CaptureSession {
 public:
  /// Throws Error{WorkspaceUnreadable}, Error{WorkspaceClaimed} or Error{ConfigError}.
  CaptureSession(WatchConfig config, Spool& spool, Clock clock = [] { return Timestamp::now(); });

  /// One poll; returns the events emitted by it, in spool order.
  std::vector<Event> tick();
  /// Emits pending diffs of every file without waiting for the debounce window.
  std::vector<Event> flush_pending();

  /// Builds, spools and returns an event for a pushed payload.
  Event record(Payload payload);

  const std::vector<FileIoError>& io_errors() const { return io_errors_; }
  std::size_t buffered_events() const { return buffer_.size(); }
  std::size_t dropped_events() const { return dropped_; }
  std::optional<std::string> last_spool_error() const { return last_spool_error_; }

  /// Text of a tracked file as last emitted.
  std::optional<std::string> emitted_text(const std::string& file) const;

 private:
  struct FileState {
    std::string emitted_text;
    std::string disk_text;
    std::string last_event_id;
    std::uint32_t diffs_since_snapshot = 0;
    bool dirty = false;
    bool deleted = false;
    Timestamp first_change;
    Timestamp last_change;
    std::filesystem::file_time_type mtime{};
    std::uintmax_t size = 0;
  };

  void scan(Timestamp now, std::vector<Event>& out);
  void emit_ready(Timestamp now, bool force, std::vector<Event>& out);
  void emit_change(const std::string& file, FileState& st, Timestamp now, std::vector<Event>& out);
  void process_inbox(Timestamp now, std::vector<Event>& out);
  Event emit(Payload payload, Timestamp now, std::vector<Event>& out);
  void deliver(const Event& event, Timestamp now);
  void drain_buffer(Timestamp now);
  bool included(const std::string& rel) const;
  bool dir_excluded(const std::string& rel) const;

  WatchConfig config_;
  Spool& spool_;
  Clock clock_;
  std::filesystem::path spool_rel_;  // spool dir relative to the workspace, if inside it
  std::map<std::string, FileState> files_;
  std::deque<Event> buffer_;
  std::size_t dropped_ = 0;
  std::optional<std::string> last_spool_error_;
  std::vector<FileIoError> io_errors_;
  Timestamp started_;
  Timestamp last_heartbeat_;
  bool first_tick_ = true;
};

}  // namespace codetrail::capture
