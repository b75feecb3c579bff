#include "codetrail/store/replay.hpp"

#include "codetrail/error.hpp"
#include "codetrail/event/diff.hpp"

namespace codetrail::store {

void FileReplay::apply(const StoredEvent& stored) {
  const Event& e = stored.event;
  if (const auto* snap = e.as<FileSnapshotPayload>()) {
    FileKey key{e.workspace_id, snap->file};
    auto [it, fresh] = files_.try_emplace(key);
    if (fresh) it->second.first_lines = snap->line_count;
    it->second.text = snap->content;
    it->second.broken_at.reset();
    orphan_diffs_.erase(key);
  } else if (const auto* diff = e.as<FileDiffPayload>()) {
    FileKey key{e.workspace_id, diff->file};
    auto it = files_.find(key);
    if (it == files_.end()) {
      orphan_diffs_.try_emplace(key, e.event_id);
      return;
    }
    if (it->second.broken_at) return;
    try {
      it->second.text = apply_diff(it->second.text, diff->hunks);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::PatchMismatch) throw;
      it->second.broken_at = e.event_id;
    }
  }
}

const std::string& FileReplay::text(const FileKey& key) const {
  auto it = files_.find(key);
  if (it == files_.end()) {
    if (auto orphan = orphan_diffs_.find(key); orphan != orphan_diffs_.end())
      throw Error(ErrorCode::BrokenChain, "diff " + orphan->second + " for " + key.file + " has no prior snapshot");
    throw Error(ErrorCode::NoSuchFile, key.workspace_id + ":" + key.file);
  }
  if (it->second.broken_at)
    throw Error(ErrorCode::BrokenChain, "event " + *it->second.broken_at + " does not apply to " + key.file);
  return it->second.text;
}

std::map<FileKey, std::string> FileReplay::texts() const {
  std::map<FileKey, std::string> out;
  for (const auto& [key, state] : files_) out.emplace(key, text(key));
  return out;
}

std::optional<std::uint64_t> FileReplay::first_snapshot_lines(const FileKey& key) const {
  auto it = files_.find(key);
  if (it == files_.end()) return std::nullopt;
  return it->second.first_lines;
}

std::vector<FileKey> FileReplay::files() const {
  std::vector<FileKey> keys;
  for (const auto& [key, state] : files_) keys.push_back(key);
  for (const auto& [key, id] : orphan_diffs_) keys.push_back(key);
  return keys;
}

std::string reconstruct_file(std::span<const StoredEvent> events, const std::string& actor_id,
                             const std::string& workspace_id, const std::string& file, Seq at_seq) {
  auto relevant = [&](const StoredEvent& s) {
    const Event& e = s.event;
    if (s.seq > at_seq || e.actor_id != actor_id || e.workspace_id != workspace_id) return false;
    const std::string* f = payload_file(e.payload);
    return f && *f == file && (e.kind == EventKind::FileSnapshot || e.kind == EventKind::FileDiff);
  };
  std::size_t snapshot = events.size();
  for (std::size_t i = 0; i < events.size(); ++i)
    if (relevant(events[i]) && events[i].event.kind == EventKind::FileSnapshot) snapshot = i;
  if (snapshot == events.size())
    throw Error(ErrorCode::NoSuchFile, "no snapshot of " + file + " at or before seq " + std::to_string(at_seq));

  std::string text = events[snapshot].event.as<FileSnapshotPayload>()->content;
  for (std::size_t i = snapshot + 1; i < events.size(); ++i) {
    if (!relevant(events[i])) continue;
    try {
      text = apply_diff(text, events[i].event.as<FileDiffPayload>()->hunks);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::PatchMismatch) throw;
      throw Error(ErrorCode::BrokenChain, "event " + events[i].event.event_id + ": " + err.what());
    }
  }
  return text;
}

}  // namespace codetrail::store
