#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "codetrail/event/event.hpp"
#include "codetrail/event/hash.hpp"
#include "codetrail/store/filter.hpp"

namespace codetrail::store {

/// Points inside one append where a test can inject a crash by throwing from the
/// fault hook. The store object must be discarded afterwards and the directory
/// reopened, exactly as after a process kill.
enum class AppendStage { BeforeWrite, PartialWrite, AfterWrite, AfterSync };

struct StoreOptions {
  std::size_t segment_max_events = 4096;
  bool sync = true;
  /// Open an existing store for reading only: nothing on disk is created or
  /// repaired and append() throws. Safe alongside a running writer.
  bool read_only = false;
  std::function<Timestamp()> clock = [] { return Timestamp::now(); };
  std::function<void(AppendStage)> fault_hook;
};

struct AppendResult {
  std::vector<std::pair<std::string, Seq>> accepted;
  std::vector<std::string> duplicates;
};

struct SegmentError {
  std::string segment;
  std::string reason;
};

struct ScanResult {
  std::vector<StoredEvent> events;
  std::vector<SegmentError> errors;
};

struct SegmentReport {
  std::string name;
  Seq first_seq = 0;
  Seq last_seq = 0;
  std::size_t event_count = 0;
  bool sealed = false;
  std::vector<std::string> problems;
};

struct VerifyReport {
  std::vector<SegmentReport> segments;
  std::vector<std::pair<Seq, Seq>> gaps;  // inclusive ranges of missing seqs
  std::vector<std::string> problems;      // store-level findings
  std::size_t event_count = 0;

  bool clean() const;
};

/// Insert-only, segmented NDJSON event log.
///
/// Each segment file holds one canonical StoredEvent per line. A segment is sealed
/// once it reaches `segment_max_events` by appending a footer line carrying the
/// SHA-256 of every byte before it; sealed segments are never written again.
///
/// Appends are serialized through a single writer, which assigns gap-free seqs and
/// non-decreasing received timestamps and makes the bytes durable before
/// returning. Reads work from a snapshot of segment lengths taken under a short
/// lock, so any number of scans may run alongside an append. There is no update or
/// delete operation.
class EventStore {
 public:
  explicit EventStore(std::filesystem::path data_dir, StoreOptions options = {});
  ~EventStore();
  EventStore(const EventStore&) = delete;
  EventStore& operator=(const EventStore&) = delete;

  /// Appends the events whose ids are new; ids already stored (or repeated within
  /// the batch) are reported as duplicates. Events must already be valid.
  AppendResult append(std::span<const Event> events);

  ScanResult scan(const EventFilter& filter) const;
  /// Streaming form: `sink` returns false to stop early.
  void scan(const EventFilter& filter, const std::function<bool(const StoredEvent&)>& sink,
            std::vector<SegmentError>* errors = nullptr) const;

  /// Text of `file` as of `at_seq`. Throws NoSuchFile / BrokenChain, or
  /// InvalidArgument when `at_seq` exceeds the current max seq.
  std::string reconstruct_file(const std::string& actor_id, const std::string& workspace_id, const std::string& file,
                               Seq at_seq) const;

  /// Re-reads every segment on disk and audits footers, event ids and seq order.
  VerifyReport verify() const;

  Seq max_seq() const;
  std::size_t size() const;
  std::optional<Seq> seq_of(const std::string& event_id) const;
  const std::filesystem::path& data_dir() const { return dir_; }

 private:
  struct SegmentView {
    std::filesystem::path path;
    std::uint64_t length = 0;
    bool sealed = false;
    Seq first_seq = 0;
    Seq last_seq = 0;
  };

  void load();
  std::vector<SegmentView> snapshot() const;
  void write_chunk(const std::string& bytes, Seq first, Seq last, std::size_t count);
  void seal_active();
  void check_alive() const;

  std::filesystem::path dir_;
  StoreOptions options_;

  std::mutex writer_;  // serializes append
  mutable std::mutex meta_;  // guards everything below
  std::vector<SegmentView> segments_;
  std::unordered_map<std::string, Seq> index_;
  Seq next_seq_ = 1;
  Timestamp last_received_;
  std::size_t active_count_ = 0;
  bool has_active_ = false;
  bool dead_ = false;
  int active_fd_ = -1;
  Sha256 active_hash_;
};

std::string segment_file_name(Seq first_seq);

}  // namespace codetrail::store
