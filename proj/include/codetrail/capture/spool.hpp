#pragma once

#include <cstdint>
#include <deque>
#include <filesystem>
#include <mutex>
#include <string>
#include <vector>

#include "codetrail/event/event.hpp"

namespace codetrail::capture {

enum class DeliveryState { Pending, Acked };

struct SpoolEntry {
  Event event;
  Timestamp enqueued_ts;
  DeliveryState delivery_state = DeliveryState::Pending;
  std::uint64_t index = 0;  // position in the spool across all day files
};

struct SpoolOptions {
  std::uint64_t max_bytes = 256ull << 20;
  bool sync = true;
};

/// Client-side insert-only outbox.
///
/// Entries go to `spool-YYYY-MM-DD.ndjson` (UTC day of enqueue, never earlier than
/// the newest existing file) one canonical JSON line each, fdatasync'ed before
/// append() returns. Delivery progress is the sidecar `ack.offset`: the number of
/// leading entries acked, replaced atomically, so it only ever grows. Lines on disk
/// always record `Pending`; the sidecar is what marks them acked.
///
/// Thread-safe; the watcher appends while the sender reads and acks.
class Spool {
 public:
  explicit Spool(std::filesystem::path dir, SpoolOptions options = {});

  /// Durably appends. Throws Error{SpoolFull} past max_bytes, Error{DiskError} on IO failure.
  SpoolEntry append(const Event& event, Timestamp enqueued_ts);

  /// Oldest pending entries, at most `limit`.
  std::vector<SpoolEntry> pending(std::size_t limit) const;
  /// Marks entries [0, count) acked; smaller counts are ignored.
  void ack_through(std::uint64_t count);

  std::uint64_t acked_count() const;
  std::uint64_t total_count() const;
  std::uint64_t pending_count() const { return total_count() - acked_count(); }
  std::uint64_t bytes_on_disk() const;

  /// Every entry with its state, read back from disk.
  std::vector<SpoolEntry> read_all() const;

  /// Dead-letter log for entries the server rejected as invalid.
  void record_rejection(const Event& event, const std::string& reason);

  const std::filesystem::path& dir() const { return dir_; }

 private:
  void load();
  std::filesystem::path file_for(Timestamp ts);

  std::filesystem::path dir_;
  SpoolOptions options_;
  mutable std::mutex mutex_;
  std::deque<SpoolEntry> pending_;
  std::uint64_t total_ = 0;
  std::uint64_t acked_ = 0;
  std::uint64_t bytes_ = 0;
  std::string newest_day_;
};

/// Parses the `ack.offset` sidecar; 0 when absent.
std::uint64_t read_ack_offset(const std::filesystem::path& spool_dir);

}  // namespace codetrail::capture
