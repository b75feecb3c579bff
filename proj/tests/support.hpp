#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "codetrail/capture/delivery.hpp"
#include "codetrail/error.hpp"
#include "codetrail/event/canonical.hpp"
#include "codetrail/event/event.hpp"
#include "codetrail/store/ingest.hpp"

namespace codetrail::testing {

inline constexpr std::int64_t kBaseMs = 1740837600000;  // 2025-03-01T14:00:00.000Z

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("codetrail-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::permissions(path_, std::filesystem::perms::owner_all, std::filesystem::perm_options::add, ec);
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << bytes;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline Timestamp at(std::int64_t seconds) { return Timestamp::from_unix_ms(kBaseMs + seconds * 1000); }

inline Event make(const std::string& actor, std::int64_t seconds, Payload payload,
                  std::optional<std::string> exercise = std::string("ex1"), const std::string& workspace = "ws") {
  return make_event({at(seconds), actor, workspace, std::move(exercise)}, std::move(payload));
}

/// Stamps consecutive seqs starting at 1, as a store would.
inline std::vector<StoredEvent> stored(const std::vector<Event>& events) {
  std::vector<StoredEvent> out;
  Seq seq = 1;
  for (const auto& e : events) out.push_back({e, seq++, e.client_ts});
  return out;
}

class ManualClock {
 public:
  explicit ManualClock(std::int64_t ms = kBaseMs) : ms_(std::make_shared<std::int64_t>(ms)) {}
  Timestamp operator()() const { return Timestamp::from_unix_ms(*ms_); }
  void advance(std::int64_t ms) { *ms_ += ms; }

 private:
  std::shared_ptr<std::int64_t> ms_;
};

/// In-process transport in front of an IngestService, mapping errors to the HTTP
/// statuses the real server uses. `before` may answer instead of the service;
/// `after` sees the real response and may replace it (e.g. to lose it).
class LoopbackTransport : public capture::Transport {
 public:
  explicit LoopbackTransport(store::IngestService& ingest) : ingest_(ingest) {}

  capture::TransportResponse post_events(const std::string& body, const std::string& token) override {
    ++calls;
    if (before)
      if (auto r = before(body)) return *r;
    capture::TransportResponse response;
    try {
      response = {200, canonical_dump(store::receipt_to_json(ingest_.ingest_batch(body, token))), {}};
    } catch (const Error& err) {
      const int status = err.code() == ErrorCode::Unauthorized   ? 401
                         : err.code() == ErrorCode::BodyTooLarge ? 413
                         : err.code() == ErrorCode::MalformedBody ? 400
                                                                  : 500;
      response = {status, err.what(), {}};
    }
    if (after) return after(response);
    return response;
  }

  int calls = 0;
  std::function<std::optional<capture::TransportResponse>(const std::string&)> before;
  std::function<capture::TransportResponse(const capture::TransportResponse&)> after;

 private:
  store::IngestService& ingest_;
};

inline capture::RetryPolicy no_sleep_retry(int attempts = 3) {
  capture::RetryPolicy p;
  p.max_attempts = attempts;
  p.sleep = [](std::int64_t) {};
  return p;
}

/// Random printable line of 0-12 chars from a small alphabet, so lines repeat.
inline std::string random_line(std::mt19937_64& rng) {
  static const char alphabet[] = "abcxyz {}();=+01";
  std::uniform_int_distribution<int> len(0, 12), ch(0, static_cast<int>(sizeof alphabet) - 2);
  std::string s;
  for (int i = len(rng); i > 0; --i) s += alphabet[ch(rng)];
  return s;
}

inline std::string random_text(std::mt19937_64& rng, int max_lines) {
  std::uniform_int_distribution<int> n(0, max_lines);
  std::string t;
  for (int i = n(rng); i > 0; --i) t += random_line(rng) + "\n";
  if (rng() % 4 == 0) t += random_line(rng);  // unterminated tail
  return t;
}

/// A random edit of `text`: replace, insert or delete a few lines.
inline std::string random_edit(std::mt19937_64& rng, const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  for (;;) {
    const auto nl = text.find('\n', start);
    if (nl == std::string::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  const int ops = 1 + static_cast<int>(rng() % 3);
  for (int i = 0; i < ops; ++i) {
    const std::size_t pos = rng() % (lines.size() + 1);
    switch (rng() % 3) {
      case 0:
        lines.insert(lines.begin() + static_cast<long>(pos), random_line(rng));
        break;
      case 1:
        if (pos < lines.size()) lines.erase(lines.begin() + static_cast<long>(pos));
        break;
      default:
        if (pos < lines.size()) lines[pos] = random_line(rng);
        break;
    }
  }
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) out += (i ? "\n" : "") + lines[i];
  return out;
}

}  // namespace codetrail::testing
