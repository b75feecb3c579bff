#include "codetrail/capture/capture_session.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "codetrail/capture/glob.hpp"
#include "codetrail/error.hpp"
#include "codetrail/event/canonical.hpp"
#include "codetrail/event/diff.hpp"
#include "codetrail/event/hash.hpp"

namespace fs = std::filesystem;

namespace codetrail::capture {

namespace {

constexpr std::int64_t kRacyWindowMs = 2000;
constexpr std::int64_t kMaxWaitWindows = 5;

bool read_whole(const fs::path& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  out.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  return !in.bad();
}

bool looks_textual(std::string_view bytes) {
  return bytes.find('\0') == std::string_view::npos && is_valid_utf8(bytes);
}

bool pushable(EventKind kind) {
  return kind == EventKind::Diagnostic || kind == EventKind::RunStart || kind == EventKind::RunEnd ||
         kind == EventKind::Submission || kind == EventKind::FileOpen;
}

}  // namespace

Event event_from_drop(const json& drop, const WatchConfig& config, Timestamp now) {
  if (!drop.is_object()) throw Error(ErrorCode::MalformedEvent, "drop must be a JSON object");
  const std::string kind_name = drop.value("kind", std::string());
  const auto kind = parse_event_kind(kind_name);
  if (!kind || !pushable(*kind)) throw Error(ErrorCode::MalformedEvent, "kind cannot be pushed: '" + kind_name + "'");
  json wire = {{"event_id", std::string(64, '0')},
               {"schema_version", kSchemaVersion},
               {"kind", kind_name},
               {"client_ts", drop.value("client_ts", now.to_string())},
               {"actor_id", config.actor_id},
               {"workspace_id", config.workspace_id},
               {"payload", drop.value("payload", json::object())}};
  if (config.exercise_id) wire["exercise_id"] = *config.exercise_id;
  auto decoded = decode_event(wire);
  auto describe = [](const Violation& v) { return std::string(to_string(v.code)) + " " + v.detail; };
  if (!decoded.event) throw Error(ErrorCode::MalformedEvent, describe(decoded.violations.front()));
  seal_event_id(*decoded.event);
  if (auto violations = validate(*decoded.event); !violations.empty())
    throw Error(ErrorCode::MalformedEvent, describe(violations.front()));
  return *decoded.event;
}

CaptureSession::CaptureSession(WatchConfig config, Spool& spool, Clock clock)
    : config_(std::move(config)), spool_(spool), clock_(std::move(clock)) {
  config_.check();
  std::error_code ec;
  fs::directory_iterator probe(config_.workspace_root, ec);
  if (ec) throw Error(ErrorCode::WorkspaceUnreadable, config_.workspace_root.string() + ": " + ec.message());
  if (fs::exists(config_.workspace_root / kExtensionMarker))
    throw Error(ErrorCode::WorkspaceClaimed, "the editor extension is already capturing " + config_.workspace_root.string());

  const fs::path root = fs::weakly_canonical(config_.workspace_root);
  const fs::path spool_abs = fs::weakly_canonical(config_.spool_dir);
  const fs::path rel = spool_abs.lexically_relative(root);
  if (!rel.empty() && *rel.begin() != "..") spool_rel_ = rel;
}

bool CaptureSession::included(const std::string& rel) const {
  return any_match(config_.include_globs, rel) && !any_match(config_.exclude_globs, rel);
}

bool CaptureSession::dir_excluded(const std::string& rel) const {
  if (!spool_rel_.empty()) {
    const fs::path r = fs::path(rel).lexically_relative(spool_rel_);
    if (!r.empty() && *r.begin() != "..") return true;
  }
  return std::any_of(config_.exclude_globs.begin(), config_.exclude_globs.end(),
                     [&](const std::string& p) { return glob_excludes_dir(p, rel); });
}

std::vector<Event> CaptureSession::tick() {
  const Timestamp now = clock_();
  std::vector<Event> out;
  io_errors_.clear();
  if (first_tick_) {
    started_ = now;
    last_heartbeat_ = now;
    first_tick_ = false;
  }
  drain_buffer(now);
  process_inbox(now, out);
  scan(now, out);
  emit_ready(now, false, out);
  if (now.unix_ms() - last_heartbeat_.unix_ms() >= config_.heartbeat_ms) {
    emit(HeartbeatPayload{}, now, out);
    last_heartbeat_ = now;
  }
  return out;
}

std::vector<Event> CaptureSession::flush_pending() {
  const Timestamp now = clock_();
  std::vector<Event> out;
  drain_buffer(now);
  emit_ready(now, true, out);
  return out;
}

void CaptureSession::scan(Timestamp now, std::vector<Event>& out) {
  const fs::path& root = config_.workspace_root;
  std::error_code ec;
  fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
  if (ec) throw Error(ErrorCode::WorkspaceUnreadable, root.string() + ": " + ec.message());

  std::set<std::string> seen;
  const auto racy_cutoff = fs::file_time_type::clock::now() - std::chrono::milliseconds(kRacyWindowMs);
  for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
    if (ec) {
      io_errors_.push_back({"", ec.message()});
      ec.clear();
      continue;
    }
    const fs::directory_entry& entry = *it;
    const std::string rel = entry.path().lexically_relative(root).generic_string();
    std::error_code sec;
    if (entry.is_symlink(sec)) continue;
    if (entry.is_directory(sec)) {
      if (dir_excluded(rel)) it.disable_recursion_pending();
      continue;
    }
    if (!entry.is_regular_file(sec) || !included(rel)) continue;

    const auto size = entry.file_size(sec);
    const auto mtime = entry.last_write_time(sec);
    if (sec) {
      io_errors_.push_back({rel, sec.message()});
      continue;
    }
    if (size > config_.max_file_bytes) continue;

    auto tracked = files_.find(rel);
    if (tracked != files_.end() && !tracked->second.deleted && tracked->second.size == size &&
        tracked->second.mtime == mtime && mtime < racy_cutoff) {
      seen.insert(rel);
      continue;
    }
    std::string raw;
    if (!read_whole(entry.path(), raw)) {
      io_errors_.push_back({rel, "cannot read file"});
      if (tracked != files_.end()) seen.insert(rel);
      continue;
    }
    if (!looks_textual(raw)) continue;
    std::string text = normalize_line_endings(raw);
    seen.insert(rel);

    if (tracked == files_.end()) {
      FileState st;
      st.size = size;
      st.mtime = mtime;
      st.disk_text = text;
      st.emitted_text = text;
      const auto lines = count_lines(text);
      const Event snap = emit(FileSnapshotPayload{rel, std::move(text), lines}, now, out);
      st.last_event_id = snap.event_id;
      files_.emplace(rel, std::move(st));
      continue;
    }
    FileState& st = tracked->second;
    st.size = size;
    st.mtime = mtime;
    if (st.deleted || text != st.disk_text) {
      st.deleted = false;
      st.disk_text = std::move(text);
      if (!st.dirty) {
        st.dirty = true;
        st.first_change = now;
      }
      st.last_change = now;
    }
  }

  for (auto& [rel, st] : files_) {
    if (seen.count(rel) || st.deleted) continue;
    st.deleted = true;
    st.disk_text.clear();
    st.size = 0;
    if (!st.dirty) {
      st.dirty = true;
      st.first_change = now;
    }
    st.last_change = now;
  }
}

void CaptureSession::emit_ready(Timestamp now, bool force, std::vector<Event>& out) {
  for (auto& [rel, st] : files_) {
    if (!st.dirty) continue;
    const std::int64_t quiet = now.unix_ms() - st.last_change.unix_ms();
    const std::int64_t waiting = now.unix_ms() - st.first_change.unix_ms();
    if (force || quiet >= config_.debounce_ms || waiting >= kMaxWaitWindows * config_.debounce_ms)
      emit_change(rel, st, now, out);
  }
}

void CaptureSession::emit_change(const std::string& file, FileState& st, Timestamp now, std::vector<Event>& out) {
  st.dirty = false;
  auto hunks = compute_diff(st.emitted_text, st.disk_text);
  if (hunks.empty()) return;
  const Event diff = emit(FileDiffPayload{file, st.last_event_id, std::move(hunks)}, now, out);
  st.last_event_id = diff.event_id;
  st.emitted_text = st.disk_text;
  ++st.diffs_since_snapshot;
  if (!st.deleted) emit(FileSavePayload{file, sha256_hex(st.emitted_text), count_lines(st.emitted_text)}, now, out);
  if (st.diffs_since_snapshot >= config_.snapshot_every) {
    const Event snap = emit(FileSnapshotPayload{file, st.emitted_text, count_lines(st.emitted_text)}, now, out);
    st.last_event_id = snap.event_id;
    st.diffs_since_snapshot = 0;
  }
}

void CaptureSession::process_inbox(Timestamp now, std::vector<Event>& out) {
  const fs::path inbox = config_.spool_dir / "inbox";
  std::error_code ec;
  if (!fs::is_directory(inbox, ec)) return;
  std::vector<fs::path> drops;
  for (const auto& entry : fs::directory_iterator(inbox, ec))
    if (entry.is_regular_file() && entry.path().extension() == ".json") drops.push_back(entry.path());
  std::sort(drops.begin(), drops.end());

  for (const auto& path : drops) {
    std::string text;
    read_whole(path, text);
    std::string problem;
    try {
      const Event event = event_from_drop(json::parse(text), config_, now);
      out.push_back(event);
      deliver(event, now);
    } catch (const std::exception& ex) {
      problem = ex.what();
    }
    if (problem.empty()) {
      fs::remove(path, ec);
    } else {
      fs::create_directories(inbox / "rejected", ec);
      fs::rename(path, inbox / "rejected" / path.filename(), ec);
      io_errors_.push_back({path.filename().string(), problem});
    }
  }
}

Event CaptureSession::record(Payload payload) {
  if (!pushable(kind_of(payload)))
    throw Error(ErrorCode::InvalidArgument, "file events come from the watcher, not record()");
  const Timestamp now = clock_();
  Event e = make_event({now, config_.actor_id, config_.workspace_id, config_.exercise_id}, std::move(payload));
  if (auto violations = validate(e); !violations.empty())
    throw Error(ErrorCode::MalformedEvent, std::string(to_string(violations.front().code)) + " " + violations.front().detail);
  drain_buffer(now);
  deliver(e, now);
  return e;
}

Event CaptureSession::emit(Payload payload, Timestamp now, std::vector<Event>& out) {
  Event e = make_event({now, config_.actor_id, config_.workspace_id, config_.exercise_id}, std::move(payload));
  out.push_back(e);
  deliver(e, now);
  return e;
}

void CaptureSession::deliver(const Event& event, Timestamp now) {
  if (buffer_.empty()) {
    try {
      spool_.append(event, now);
      last_spool_error_.reset();
      return;
    } catch (const Error& err) {
      if (err.code() != ErrorCode::SpoolFull && err.code() != ErrorCode::DiskError) throw;
      last_spool_error_ = err.what();
    }
  }
  if (buffer_.size() >= config_.memory_buffer_events) {
    ++dropped_;
    return;
  }
  buffer_.push_back(event);
}

void CaptureSession::drain_buffer(Timestamp now) {
  while (!buffer_.empty()) {
    try {
      spool_.append(buffer_.front(), now);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::SpoolFull && err.code() != ErrorCode::DiskError) throw;
      last_spool_error_ = err.what();
      return;
    }
    buffer_.pop_front();
  }
  last_spool_error_.reset();
}

std::optional<std::string> CaptureSession::emitted_text(const std::string& file) const {
  auto it = files_.find(file);
  if (it == files_.end()) return std::nullopt;
  return it->second.emitted_text;
}

}  // namespace codetrail::capture
