#include "codetrail/capture/spool.hpp"

#include <fcntl.h>
#include <sys/statvfs.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <regex>

#include "codetrail/error.hpp"
#include "codetrail/event/canonical.hpp"

namespace fs = std::filesystem;

namespace codetrail::capture {

namespace {

constexpr const char* kAckFile = "ack.offset";

void append_durably(const fs::path& path, std::string_view bytes, bool sync) {
  const int fd = ::open(path.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(ErrorCode::DiskError, "open " + path.string() + ": " + std::strerror(errno));
  while (!bytes.empty()) {
    const ssize_t n = ::write(fd, bytes.data(), bytes.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      const int err = errno;
      ::close(fd);
      throw Error(err == ENOSPC ? ErrorCode::SpoolFull : ErrorCode::DiskError,
                  "write " + path.string() + ": " + std::strerror(err));
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
  if (sync && ::fdatasync(fd) != 0) {
    const int err = errno;
    ::close(fd);
    throw Error(ErrorCode::DiskError, "fdatasync " + path.string() + ": " + std::strerror(err));
  }
  ::close(fd);
}

void sync_dir(const fs::path& dir) {
  const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC);
  if (fd < 0) return;
  ::fsync(fd);
  ::close(fd);
}

std::vector<fs::path> day_files(const fs::path& dir) {
  static const std::regex pattern(R"(spool-\d{4}-\d{2}-\d{2}\.ndjson)");
  std::vector<fs::path> out;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(dir, ec))
    if (entry.is_regular_file() && std::regex_match(entry.path().filename().string(), pattern)) out.push_back(entry.path());
  std::sort(out.begin(), out.end());
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string_view day_of(const fs::path& file) {
  static thread_local std::string name;
  name = file.filename().string();
  return std::string_view(name).substr(6, 10);
}

// The directory must be writable by its mode bits and on a writable filesystem;
// checked explicitly so a read-only spool is refused even for privileged users.
void require_writable(const fs::path& dir) {
  std::error_code ec;
  const auto status = fs::status(dir, ec);
  if (ec || !fs::is_directory(status)) throw Error(ErrorCode::DiskError, "spool directory missing: " + dir.string());
  if ((status.permissions() & fs::perms::owner_write) == fs::perms::none)
    throw Error(ErrorCode::DiskError, "spool directory is read-only: " + dir.string());
  struct statvfs vfs {};
  if (::statvfs(dir.c_str(), &vfs) == 0 && (vfs.f_flag & ST_RDONLY))
    throw Error(ErrorCode::DiskError, "spool filesystem is read-only: " + dir.string());
}

}  // namespace

std::uint64_t read_ack_offset(const fs::path& spool_dir) {
  std::ifstream in(spool_dir / kAckFile);
  std::uint64_t n = 0;
  if (in >> n) return n;
  return 0;
}

Spool::Spool(fs::path dir, SpoolOptions options) : dir_(std::move(dir)), options_(options) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw Error(ErrorCode::DiskError, "cannot create spool dir " + dir_.string() + ": " + ec.message());
  load();
}

void Spool::load() {
  acked_ = read_ack_offset(dir_);
  const auto files = day_files(dir_);
  for (std::size_t i = 0; i < files.size(); ++i) {
    std::string bytes = read_file(files[i]);
    const auto last_nl = bytes.rfind('\n');
    const std::size_t complete = last_nl == std::string::npos ? 0 : last_nl + 1;
    if (complete != bytes.size() && i + 1 == files.size()) {
      // Torn tail from a crash during append: that entry was never reported as spooled.
      if (::truncate(files[i].c_str(), static_cast<off_t>(complete)) != 0)
        throw Error(ErrorCode::DiskError, "cannot truncate " + files[i].string());
      bytes.resize(complete);
    }
    bytes_ += bytes.size();
    std::size_t start = 0;
    while (start < complete) {
      const std::size_t nl = bytes.find('\n', start);
      const std::string_view line(bytes.data() + start, nl - start);
      start = nl + 1;
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception&) {
        continue;
      }
      if (!j.is_object() || !j.contains("event") || !j.contains("enqueued_ts")) continue;
      auto decoded = decode_event(j["event"]);
      auto ts = j["enqueued_ts"].is_string() ? Timestamp::parse(j["enqueued_ts"].get<std::string>()) : std::nullopt;
      if (!decoded.event || !ts) continue;
      const std::uint64_t index = total_++;
      if (index >= acked_) pending_.push_back({std::move(*decoded.event), *ts, DeliveryState::Pending, index});
    }
  }
  if (!files.empty()) newest_day_ = std::string(day_of(files.back()));
  acked_ = std::min(acked_, total_);
}

fs::path Spool::file_for(Timestamp ts) {
  std::string day = ts.to_string().substr(0, 10);
  if (day < newest_day_) day = newest_day_;
  newest_day_ = day;
  return dir_ / ("spool-" + day + ".ndjson");
}

SpoolEntry Spool::append(const Event& event, Timestamp enqueued_ts) {
  std::lock_guard lock(mutex_);
  require_writable(dir_);
  const std::string line =
      canonical_dump(json{{"delivery_state", "Pending"}, {"enqueued_ts", enqueued_ts.to_string()},
                          {"event", event_to_json(event, true)}}) +
      "\n";
  if (bytes_ + line.size() > options_.max_bytes)
    throw Error(ErrorCode::SpoolFull, "spool would exceed " + std::to_string(options_.max_bytes) + " bytes");
  const fs::path path = file_for(enqueued_ts);
  const bool fresh = !fs::exists(path);
  append_durably(path, line, options_.sync);
  if (fresh && options_.sync) sync_dir(dir_);
  bytes_ += line.size();
  SpoolEntry entry{event, enqueued_ts, DeliveryState::Pending, total_++};
  pending_.push_back(entry);
  return entry;
}

std::vector<SpoolEntry> Spool::pending(std::size_t limit) const {
  std::lock_guard lock(mutex_);
  const std::size_t n = std::min(limit, pending_.size());
  return {pending_.begin(), pending_.begin() + static_cast<long>(n)};
}

void Spool::ack_through(std::uint64_t count) {
  std::lock_guard lock(mutex_);
  count = std::min(count, total_);
  if (count <= acked_) return;
  const fs::path tmp = dir_ / "ack.offset.tmp";
  {
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) throw Error(ErrorCode::DiskError, "open " + tmp.string() + ": " + std::strerror(errno));
    const std::string text = std::to_string(count) + "\n";
    const bool ok = ::write(fd, text.data(), text.size()) == static_cast<ssize_t>(text.size()) &&
                    (!options_.sync || ::fdatasync(fd) == 0);
    ::close(fd);
    if (!ok) throw Error(ErrorCode::DiskError, "cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, dir_ / kAckFile, ec);
  if (ec) throw Error(ErrorCode::DiskError, "cannot replace ack offset: " + ec.message());
  if (options_.sync) sync_dir(dir_);
  acked_ = count;
  while (!pending_.empty() && pending_.front().index < acked_) pending_.pop_front();
}

std::uint64_t Spool::acked_count() const {
  std::lock_guard lock(mutex_);
  return acked_;
}

std::uint64_t Spool::total_count() const {
  std::lock_guard lock(mutex_);
  return total_;
}

std::uint64_t Spool::bytes_on_disk() const {
  std::lock_guard lock(mutex_);
  return bytes_;
}

std::vector<SpoolEntry> Spool::read_all() const {
  std::lock_guard lock(mutex_);
  std::vector<SpoolEntry> out;
  std::uint64_t index = 0;
  const std::uint64_t acked = read_ack_offset(dir_);
  for (const auto& file : day_files(dir_)) {
    std::ifstream in(file, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception&) {
        continue;
      }
      auto decoded = decode_event(j.value("event", json()));
      auto ts = Timestamp::parse(j.value("enqueued_ts", std::string()));
      if (!decoded.event || !ts) continue;
      const auto state = index < acked ? DeliveryState::Acked : DeliveryState::Pending;
      out.push_back({std::move(*decoded.event), *ts, state, index++});
    }
  }
  return out;
}

void Spool::record_rejection(const Event& event, const std::string& reason) {
  std::lock_guard lock(mutex_);
  const std::string line = canonical_dump(json{{"event", event_to_json(event, true)}, {"reason", reason}}) + "\n";
  append_durably(dir_ / "rejected.ndjson", line, options_.sync);
}

}  // namespace codetrail::capture
