#include "codetrail/capture/watch_config.hpp"

#include <unistd.h>

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "codetrail/error.hpp"
#include "codetrail/event/event.hpp"

namespace fs = std::filesystem;

namespace codetrail::capture {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = std::min(s.find(',', start), s.size());
    if (auto item = trim(s.substr(start, comma - start)); !item.empty()) out.push_back(std::move(item));
    start = comma + 1;
  }
  return out;
}

template <class Int>
Int parse_int(const std::string& key, const std::string& value) {
  Int out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw Error(ErrorCode::ConfigError, key + ": expected an integer, got '" + value + "'");
  return out;
}

fs::path resolve(const fs::path& base, const std::string& value) {
  fs::path p(value);
  return p.is_relative() && !base.empty() ? base / p : p;
}

}  // namespace

std::vector<std::string> default_exclude_globs() {
  return {"**/.git/**",         "**/.hg/**",   "**/.svn/**",  "**/.codetrail/**", "**/node_modules/**",
          "**/__pycache__/**",  "build/**",    "dist/**",     "target/**",        "out/**",
          "*.o",                "*.obj",       "*.a",         "*.so",             "*.dll",
          "*.exe",              "*.class",     "*.jar",       "*.pyc",            "*.swp",
          "*~",                 ".codetrail-extension"};
}

WatchConfig WatchConfig::parse(std::string_view text, const fs::path& base_dir) {
  WatchConfig c;
  std::istringstream in{std::string(text)};
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    const std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::ConfigError, "line " + std::to_string(number) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "workspace_root") c.workspace_root = resolve(base_dir, value);
    else if (key == "include_globs") c.include_globs = split_list(value);
    else if (key == "exclude_globs") c.exclude_globs = split_list(value);
    else if (key == "debounce_ms") c.debounce_ms = parse_int<std::int64_t>(key, value);
    else if (key == "actor_id") c.actor_id = value;
    else if (key == "workspace_id") c.workspace_id = value;
    else if (key == "exercise_id") c.exercise_id = value.empty() ? std::nullopt : std::optional<std::string>(value);
    else if (key == "server_url") c.server_url = value;
    else if (key == "auth_token") c.auth_token = value;
    else if (key == "spool_dir") c.spool_dir = resolve(base_dir, value);
    else if (key == "poll_ms") c.poll_ms = parse_int<std::int64_t>(key, value);
    else if (key == "heartbeat_ms") c.heartbeat_ms = parse_int<std::int64_t>(key, value);
    else if (key == "flush_interval_ms") c.flush_interval_ms = parse_int<std::int64_t>(key, value);
    else if (key == "snapshot_every") c.snapshot_every = parse_int<std::uint32_t>(key, value);
    else if (key == "max_file_bytes") c.max_file_bytes = parse_int<std::uint64_t>(key, value);
    else if (key == "batch_size") c.batch_size = parse_int<std::size_t>(key, value);
    else if (key == "spool_max_bytes") c.spool_max_bytes = parse_int<std::uint64_t>(key, value);
    else if (key == "memory_buffer_events") c.memory_buffer_events = parse_int<std::size_t>(key, value);
    else throw Error(ErrorCode::ConfigError, "line " + std::to_string(number) + ": unknown key '" + key + "'");
  }
  if (c.auth_token.empty()) {
    if (const char* env = std::getenv("CODETRAIL_TOKEN")) c.auth_token = env;
  }
  return c;
}

WatchConfig WatchConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ConfigError, "cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), fs::absolute(path).parent_path());
}

void WatchConfig::check() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::ConfigError, what); };
  if (debounce_ms < 100) fail("debounce_ms must be >= 100");
  if (!is_valid_actor_id(actor_id)) fail("actor_id must be 1-64 chars of [a-z0-9_-]");
  if (workspace_id.empty()) fail("workspace_id is required");
  if (exercise_id && exercise_id->empty()) fail("exercise_id must not be empty when set");
  std::error_code ec;
  if (workspace_root.empty() || !fs::is_directory(workspace_root, ec)) fail("workspace_root does not exist: " + workspace_root.string());
  if (spool_dir.empty()) fail("spool_dir is required");
  fs::create_directories(spool_dir, ec);
  if (ec || ::access(spool_dir.c_str(), W_OK) != 0) fail("spool_dir is not writable: " + spool_dir.string());
  if (poll_ms < 10) fail("poll_ms must be >= 10");
  if (heartbeat_ms <= 0) fail("heartbeat_ms must be positive");
  if (snapshot_every == 0) fail("snapshot_every must be positive");
  if (batch_size == 0) fail("batch_size must be positive");
  if (include_globs.empty()) fail("include_globs must list at least one pattern");
}

}  // namespace codetrail::capture
