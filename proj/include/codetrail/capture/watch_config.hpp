#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace codetrail::capture {

std::vector<std::string> default_exclude_globs();

/// Capture settings for one workspace. Read from a plain `key = value` file whose
/// keys are the field names below; list values are comma separated and `#` starts
/// a comment line.
struct WatchConfig {
  std::filesystem::path workspace_root;
  std::vector<std::string> include_globs{"**"};
  std::vector<std::string> exclude_globs = default_exclude_globs();
  std::int64_t debounce_ms = 2000;
  std::string actor_id;
  std::string workspace_id;
  std::optional<std::string> exercise_id;
  std::string server_url;
  std::string auth_token;
  std::filesystem::path spool_dir;

  std::int64_t poll_ms = 500;
  std::int64_t heartbeat_ms = 60000;
  std::int64_t flush_interval_ms = 5000;
  std::uint32_t snapshot_every = 50;  // full snapshot after this many diffs of one file
  std::uint64_t max_file_bytes = 1u << 20;
  std::size_t batch_size = 200;
  std::uint64_t spool_max_bytes = 256ull << 20;
  std::size_t memory_buffer_events = 10000;

  /// Parses config text; relative paths resolve against `base_dir`. Throws
  /// Error{ConfigError}. An empty auth_token falls back to $CODETRAIL_TOKEN.
  static WatchConfig parse(std::string_view text, const std::filesystem::path& base_dir = {});
  static WatchConfig load(const std::filesystem::path& path);

  /// Throws Error{ConfigError} when an invariant fails; creates spool_dir if missing.
  void check() const;
};

}  // namespace codetrail::capture
