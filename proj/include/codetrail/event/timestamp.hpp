#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace codetrail {

/// UTC wall-clock instant with millisecond precision.
///
/// The canonical text form is RFC 3339 with exactly three fractional digits and a
/// `Z` suffix, e.g. `2025-03-01T14:05:09.123Z`. `parse` accepts only that form so
/// a parse/render round trip is byte-identical.
class Timestamp {
 public:
  constexpr Timestamp() = default;
  static constexpr Timestamp from_unix_ms(std::int64_t ms) { return Timestamp(ms); }

  /// Strict canonical parse; nullopt on any deviation.
  static std::optional<Timestamp> parse(std::string_view text);
  /// Canonical parse or throws Error{BadTimestamp}.
  static Timestamp parse_or_throw(std::string_view text);
  /// Accepts the canonical form plus `YYYY-MM-DD`, `YYYY-MM-DDTHH:MM:SSZ` and
  /// fractional seconds of 1-3 digits. Intended for CLI input only.
  static std::optional<Timestamp> parse_lenient(std::string_view text);

  static Timestamp now();

  constexpr std::int64_t unix_ms() const { return ms_; }
  std::string to_string() const;

  constexpr Timestamp plus_ms(std::int64_t delta) const { return Timestamp(ms_ + delta); }

  friend constexpr auto operator<=>(Timestamp, Timestamp) = default;

 private:
  constexpr explicit Timestamp(std::int64_t ms) : ms_(ms) {}
  std::int64_t ms_ = 0;
};

}  // namespace codetrail
