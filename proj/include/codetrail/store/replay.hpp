#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>

#include "codetrail/event/event.hpp"

namespace codetrail::store {

struct FileKey {
  std::string workspace_id;
  std::string file;
  friend auto operator<=>(const FileKey&, const FileKey&) = default;
};

/// Incremental replay of snapshot/diff events for many files.
///
/// A FileSnapshot resets its file; a FileDiff is applied on the current text. A
/// diff that does not apply marks the file broken until the next snapshot, so the
/// state at any point equals "latest snapshot plus the diffs after it".
class FileReplay {
 public:
  void apply(const StoredEvent& stored);

  bool known(const FileKey& key) const { return files_.count(key) != 0; }
  /// Throws Error{NoSuchFile} or Error{BrokenChain} (naming the offending event).
  const std::string& text(const FileKey& key) const;
  std::map<FileKey, std::string> texts() const;  // throws like text()

  /// Line count of the first snapshot this replay saw for the file.
  std::optional<std::uint64_t> first_snapshot_lines(const FileKey& key) const;

  std::vector<FileKey> files() const;

 private:
  struct State {
    std::string text;
    std::optional<std::string> broken_at;
    std::uint64_t first_lines = 0;
  };
  std::map<FileKey, State> files_;
  std::map<FileKey, std::string> orphan_diffs_;  // diffs seen before any snapshot
};

/// Replays `file` for (actor, workspace) up to and including `at_seq` from a
/// seq-ordered event range: the latest snapshot at or before `at_seq`, then all
/// later diffs at or before it. Throws Error{NoSuchFile} / Error{BrokenChain}.
std::string reconstruct_file(std::span<const StoredEvent> events, const std::string& actor_id,
                             const std::string& workspace_id, const std::string& file, Seq at_seq);

}  // namespace codetrail::store
