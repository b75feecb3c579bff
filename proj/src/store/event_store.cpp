#include "codetrail/store/event_store.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <regex>
#include <unordered_set>

#include "codetrail/error.hpp"
#include "codetrail/event/canonical.hpp"
#include "codetrail/event/validate.hpp"
#include "codetrail/store/replay.hpp"

namespace fs = std::filesystem;

namespace codetrail::store {

namespace {

constexpr std::string_view kFooterPrefix = "{\"footer\":";

std::string read_prefix(const fs::path& path, std::optional<std::uint64_t> length = std::nullopt) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::CorruptSegment, "cannot open " + path.filename().string());
  std::string bytes;
  if (length) {
    bytes.resize(*length);
    in.read(bytes.data(), static_cast<std::streamsize>(*length));
    if (static_cast<std::uint64_t>(in.gcount()) != *length)
      throw Error(ErrorCode::CorruptSegment, path.filename().string() + " is shorter than expected");
  } else {
    bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }
  return bytes;
}

void write_all(int fd, std::string_view bytes, const fs::path& path) {
  while (!bytes.empty()) {
    const ssize_t n = ::write(fd, bytes.data(), bytes.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::DiskError, "write " + path.string() + ": " + std::strerror(errno));
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
}

void sync_fd(int fd, const fs::path& path) {
  if (::fdatasync(fd) != 0) throw Error(ErrorCode::DiskError, "fdatasync " + path.string() + ": " + std::strerror(errno));
}

void sync_dir(const fs::path& dir) {
  const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
  if (fd < 0) return;
  ::fsync(fd);
  ::close(fd);
}

std::vector<fs::path> list_segments(const fs::path& dir) {
  static const std::regex pattern(R"(segment-\d{20}\.ndjson)");
  std::vector<fs::path> out;
  if (!fs::exists(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && std::regex_match(entry.path().filename().string(), pattern))
      out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct Lines {
  std::vector<std::string_view> lines;  // without trailing '\n'
  bool torn_tail = false;               // bytes after the last '\n'
  std::size_t complete_bytes = 0;
};

Lines split_complete_lines(std::string_view bytes) {
  Lines out;
  std::size_t start = 0;
  while (start < bytes.size()) {
    const std::size_t nl = bytes.find('\n', start);
    if (nl == std::string_view::npos) {
      out.torn_tail = true;
      break;
    }
    out.lines.push_back(bytes.substr(start, nl - start));
    start = nl + 1;
  }
  out.complete_bytes = start;
  return out;
}

bool is_footer(std::string_view line) { return line.substr(0, kFooterPrefix.size()) == kFooterPrefix; }

struct Footer {
  Seq first_seq = 0;
  Seq last_seq = 0;
  std::string sha256;
};

std::optional<Footer> parse_footer(std::string_view line) {
  try {
    const json j = json::parse(line);
    const json& f = j.at("footer");
    return Footer{f.at("first_seq").get<Seq>(), f.at("last_seq").get<Seq>(), f.at("sha256").get<std::string>()};
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

}  // namespace

bool VerifyReport::clean() const {
  if (!gaps.empty() || !problems.empty()) return false;
  return std::all_of(segments.begin(), segments.end(), [](const SegmentReport& s) { return s.problems.empty(); });
}

std::string segment_file_name(Seq first_seq) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "segment-%020llu.ndjson", static_cast<unsigned long long>(first_seq));
  return buf;
}

EventStore::EventStore(fs::path data_dir, StoreOptions options) : dir_(std::move(data_dir)), options_(std::move(options)) {
  if (options_.segment_max_events == 0) throw Error(ErrorCode::InvalidArgument, "segment_max_events must be positive");
  std::error_code ec;
  if (options_.read_only) {
    if (!fs::is_directory(dir_, ec)) throw Error(ErrorCode::DiskError, "no event store at " + dir_.string());
  } else {
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::DiskError, "cannot create " + dir_.string() + ": " + ec.message());
  }
  load();
}

EventStore::~EventStore() {
  if (active_fd_ >= 0) ::close(active_fd_);
}

void EventStore::load() {
  const auto paths = list_segments(dir_);
  Seq max_seq = 0;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    std::string bytes = read_prefix(paths[i]);
    Lines lines = split_complete_lines(bytes);
    const bool last = i + 1 == paths.size();
    if (lines.torn_tail && last) {
      // A crash mid-append leaves a partial final line that was never acknowledged.
      // A reader just ignores it; it may be a write still in progress.
      if (!options_.read_only && ::truncate(paths[i].c_str(), static_cast<off_t>(lines.complete_bytes)) != 0)
        throw Error(ErrorCode::DiskError, "cannot truncate torn tail of " + paths[i].string());
      bytes.resize(lines.complete_bytes);
      lines = split_complete_lines(bytes);
    }
    SegmentView view;
    view.path = paths[i];
    view.length = bytes.size();
    std::size_t events = 0;
    for (auto line : lines.lines) {
      if (is_footer(line)) {
        view.sealed = true;
        continue;
      }
      try {
        StoredEvent s = decode_stored_event(line);
        if (view.first_seq == 0) view.first_seq = s.seq;
        view.last_seq = s.seq;
        max_seq = std::max(max_seq, s.seq);
        last_received_ = std::max(last_received_, s.received_ts);
        index_.emplace(s.event.event_id, s.seq);
        ++events;
      } catch (const Error&) {
        // Left for verify() to report.
      }
    }
    if (last && !view.sealed) {
      has_active_ = true;
      active_count_ = events;
      active_hash_.update(bytes);
    }
    segments_.push_back(std::move(view));
  }
  next_seq_ = max_seq + 1;
}

void EventStore::check_alive() const {
  if (dead_) throw Error(ErrorCode::DiskError, "store failed during a previous append; reopen it");
}

AppendResult EventStore::append(std::span<const Event> events) {
  std::lock_guard writer(writer_);
  check_alive();
  if (options_.read_only) throw Error(ErrorCode::InvalidArgument, "store opened read-only");
  AppendResult result;
  try {
    std::unordered_set<std::string_view> batch_ids;
    Seq seq = next_seq_;
    const Timestamp received = std::max(options_.clock(), last_received_);
    std::vector<std::string> lines;
    for (const Event& e : events) {
      if (index_.count(e.event_id) || !batch_ids.insert(e.event_id).second) {
        result.duplicates.push_back(e.event_id);
        continue;
      }
      lines.push_back(encode_stored_event(StoredEvent{e, seq, received}) + "\n");
      result.accepted.emplace_back(e.event_id, seq);
      ++seq;
    }

    std::size_t pos = 0;
    while (pos < lines.size()) {
      // A crash between the last write and its seal can leave a full active segment.
      if (has_active_ && active_count_ >= options_.segment_max_events) seal_active();
      if (!has_active_) {
        const Seq first = result.accepted[pos].second;
        SegmentView view;
        view.path = dir_ / segment_file_name(first);
        {
          std::lock_guard meta(meta_);
          segments_.push_back(view);
        }
        has_active_ = true;
        active_count_ = 0;
        active_hash_ = Sha256();
      }
      const std::size_t n = std::min(lines.size() - pos, options_.segment_max_events - active_count_);
      std::string chunk;
      for (std::size_t k = pos; k < pos + n; ++k) chunk += lines[k];
      write_chunk(chunk, result.accepted[pos].second, result.accepted[pos + n - 1].second, n);
      pos += n;
      if (active_count_ >= options_.segment_max_events) seal_active();
    }

    std::lock_guard meta(meta_);
    for (const auto& [id, s] : result.accepted) index_.emplace(id, s);
    next_seq_ = seq;
    if (!lines.empty()) last_received_ = received;
  } catch (...) {
    dead_ = true;
    throw;
  }
  return result;
}

void EventStore::write_chunk(const std::string& bytes, Seq first, Seq last, std::size_t count) {
  const fs::path path = segments_.back().path;
  const bool fresh = active_fd_ < 0 && !fs::exists(path);
  if (active_fd_ < 0) {
    active_fd_ = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
    if (active_fd_ < 0) throw Error(ErrorCode::DiskError, "open " + path.string() + ": " + std::strerror(errno));
  }
  const auto& hook = options_.fault_hook;
  if (hook) hook(AppendStage::BeforeWrite);
  if (hook) {
    const std::size_t half = bytes.size() / 2;
    write_all(active_fd_, std::string_view(bytes).substr(0, half), path);
    hook(AppendStage::PartialWrite);
    write_all(active_fd_, std::string_view(bytes).substr(half), path);
  } else {
    write_all(active_fd_, bytes, path);
  }
  if (hook) hook(AppendStage::AfterWrite);
  if (options_.sync) {
    sync_fd(active_fd_, path);
    if (fresh) sync_dir(dir_);
  }
  if (hook) hook(AppendStage::AfterSync);
  active_hash_.update(bytes);
  active_count_ += count;

  std::lock_guard meta(meta_);
  auto& view = segments_.back();
  if (view.first_seq == 0) view.first_seq = first;
  view.last_seq = last;
  view.length += bytes.size();
}

void EventStore::seal_active() {
  auto& view = segments_.back();
  if (active_fd_ < 0) {
    active_fd_ = ::open(view.path.c_str(), O_WRONLY | O_APPEND | O_CLOEXEC);
    if (active_fd_ < 0) throw Error(ErrorCode::DiskError, "open " + view.path.string() + ": " + std::strerror(errno));
  }
  const std::string footer =
      canonical_dump(json{{"footer", {{"first_seq", view.first_seq}, {"last_seq", view.last_seq},
                                      {"sha256", active_hash_.hex_digest()}}}}) +
      "\n";
  write_all(active_fd_, footer, view.path);
  if (options_.sync) sync_fd(active_fd_, view.path);
  ::close(active_fd_);
  active_fd_ = -1;
  has_active_ = false;
  active_count_ = 0;
  std::lock_guard meta(meta_);
  view.sealed = true;
  view.length += footer.size();
}

std::vector<EventStore::SegmentView> EventStore::snapshot() const {
  std::lock_guard meta(meta_);
  return segments_;
}

ScanResult EventStore::scan(const EventFilter& filter) const {
  ScanResult result;
  scan(
      filter,
      [&](const StoredEvent& s) {
        result.events.push_back(s);
        return true;
      },
      &result.errors);
  return result;
}

void EventStore::scan(const EventFilter& filter, const std::function<bool(const StoredEvent&)>& sink,
                      std::vector<SegmentError>* errors) const {
  filter.check();
  auto report = [&](const SegmentView& v, std::string reason) {
    if (errors) errors->push_back({v.path.filename().string(), std::move(reason)});
  };
  for (const SegmentView& view : snapshot()) {
    if (view.length == 0) continue;
    if (filter.to_seq && view.first_seq >= *filter.to_seq) break;
    if (filter.from_seq && view.last_seq < *filter.from_seq) continue;
    std::string bytes;
    try {
      bytes = read_prefix(view.path, view.length);
    } catch (const Error& err) {
      report(view, err.what());
      continue;
    }
    Lines lines = split_complete_lines(bytes);
    if (view.sealed) {
      if (lines.lines.empty() || !is_footer(lines.lines.back())) {
        report(view, "sealed segment lost its footer");
        continue;
      }
      const auto footer = parse_footer(lines.lines.back());
      const std::size_t body = bytes.size() - lines.lines.back().size() - 1;
      if (!footer || sha256_hex(std::string_view(bytes).substr(0, body)) != footer->sha256) {
        report(view, "footer checksum mismatch");
        continue;
      }
      lines.lines.pop_back();
    }
    for (std::size_t i = 0; i < lines.lines.size(); ++i) {
      StoredEvent stored;
      try {
        stored = decode_stored_event(lines.lines[i]);
      } catch (const Error& err) {
        report(view, "line " + std::to_string(i + 1) + ": " + err.what());
        continue;
      }
      if (filter.matches(stored) && !sink(stored)) return;
    }
  }
}

std::string EventStore::reconstruct_file(const std::string& actor_id, const std::string& workspace_id,
                                         const std::string& file, Seq at_seq) const {
  if (at_seq > max_seq())
    throw Error(ErrorCode::InvalidArgument,
                "at_seq " + std::to_string(at_seq) + " is beyond the store's max seq " + std::to_string(max_seq()));
  EventFilter filter;
  filter.actor_id = actor_id;
  filter.workspace_id = workspace_id;
  filter.kinds = {EventKind::FileSnapshot, EventKind::FileDiff};
  filter.to_seq = at_seq + 1;
  std::vector<StoredEvent> events;
  scan(filter, [&](const StoredEvent& s) {
    if (const std::string* f = payload_file(s.event.payload); f && *f == file) events.push_back(s);
    return true;
  });
  return store::reconstruct_file(events, actor_id, workspace_id, file, at_seq);
}

VerifyReport EventStore::verify() const {
  VerifyReport report;
  std::unordered_set<std::string> ids;
  Seq expected = 1;
  Timestamp last_received;
  const auto paths = list_segments(dir_);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    SegmentReport seg;
    seg.name = paths[i].filename().string();
    auto problem = [&seg](std::string text) { seg.problems.push_back(std::move(text)); };
    std::string bytes;
    try {
      bytes = read_prefix(paths[i]);
    } catch (const Error& err) {
      problem(err.what());
      report.segments.push_back(std::move(seg));
      continue;
    }
    Lines lines = split_complete_lines(bytes);
    if (lines.torn_tail) problem("torn final line");
    if (!lines.lines.empty() && is_footer(lines.lines.back())) {
      seg.sealed = true;
      const auto footer = parse_footer(lines.lines.back());
      const std::size_t body = lines.complete_bytes - lines.lines.back().size() - 1;
      if (!footer) {
        problem("unreadable footer");
      } else if (sha256_hex(std::string_view(bytes).substr(0, body)) != footer->sha256) {
        problem("footer checksum mismatch");
      }
      lines.lines.pop_back();
      if (footer) {
        seg.first_seq = footer->first_seq;
        seg.last_seq = footer->last_seq;
      }
    } else if (i + 1 != paths.size()) {
      problem("segment before the active one is not sealed");
    }

    Seq prev = 0;
    Seq first_seen = 0;
    for (std::size_t n = 0; n < lines.lines.size(); ++n) {
      const std::string where = "line " + std::to_string(n + 1) + ": ";
      if (is_footer(lines.lines[n])) {
        problem(where + "footer in the middle of a segment");
        continue;
      }
      StoredEvent stored;
      try {
        stored = decode_stored_event(lines.lines[n]);
      } catch (const Error& err) {
        problem(where + err.what());
        continue;
      }
      for (const auto& v : validate(stored.event))
        problem(where + std::string(to_string(v.code)) + " " + v.detail);
      if (!ids.insert(stored.event.event_id).second) problem(where + "duplicate event_id " + stored.event.event_id);
      if (prev != 0 && stored.seq != prev + 1) problem(where + "seq " + std::to_string(stored.seq) + " follows " + std::to_string(prev));
      if (stored.received_ts < last_received) problem(where + "received_ts goes backwards");
      last_received = std::max(last_received, stored.received_ts);
      if (first_seen == 0) first_seen = stored.seq;
      prev = stored.seq;
      ++seg.event_count;
    }
    if (seg.event_count > 0) {
      if (seg.sealed && (seg.first_seq != first_seen || seg.last_seq != prev))
        problem("footer seq range does not match its events");
      seg.first_seq = first_seen;
      seg.last_seq = prev;
      if (seg.name != segment_file_name(first_seen)) problem("file name does not match first seq");
      if (first_seen > expected) report.gaps.emplace_back(expected, first_seen - 1);
      if (first_seen < expected) report.problems.push_back(seg.name + " overlaps the previous segment");
      expected = std::max(expected, prev + 1);
    } else if (seg.problems.empty() && i + 1 != paths.size()) {
      problem("segment holds no events");
    }
    report.event_count += seg.event_count;
    report.segments.push_back(std::move(seg));
  }
  const Seq known_max = max_seq();
  if (known_max + 1 > expected) report.gaps.emplace_back(expected, known_max);
  return report;
}

Seq EventStore::max_seq() const {
  std::lock_guard meta(meta_);
  return next_seq_ - 1;
}

std::size_t EventStore::size() const {
  std::lock_guard meta(meta_);
  return index_.size();
}

std::optional<Seq> EventStore::seq_of(const std::string& event_id) const {
  std::lock_guard meta(meta_);
  auto it = index_.find(event_id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

}  // namespace codetrail::store
