#include "codetrail/event/timestamp.hpp"

#include <chrono>
#include <cstdio>

#include "codetrail/error.hpp"

namespace codetrail {

namespace {

// Howard Hinnant's civil-date algorithms.
constexpr std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

struct Civil {
  std::int64_t y;
  unsigned m;
  unsigned d;
};

constexpr Civil civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const auto doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  return {y + (m <= 2), m, d};
}

constexpr bool is_leap(std::int64_t y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

constexpr unsigned days_in_month(std::int64_t y, unsigned m) {
  constexpr unsigned table[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && is_leap(y) ? 29 : table[m - 1];
}

bool read_digits(std::string_view text, std::size_t pos, std::size_t count, int& out) {
  if (pos + count > text.size()) return false;
  int v = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const char c = text[pos + i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  out = v;
  return true;
}

std::optional<Timestamp> assemble(int y, int mo, int d, int h, int mi, int s, int ms) {
  if (mo < 1 || mo > 12) return std::nullopt;
  if (d < 1 || static_cast<unsigned>(d) > days_in_month(y, static_cast<unsigned>(mo))) return std::nullopt;
  if (h > 23 || mi > 59 || s > 59) return std::nullopt;
  const std::int64_t days = days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d));
  const std::int64_t secs = days * 86400 + h * 3600 + mi * 60 + s;
  return Timestamp::from_unix_ms(secs * 1000 + ms);
}

// Parses YYYY-MM-DDTHH:MM:SS starting at 0; returns false on mismatch.
bool parse_datetime(std::string_view t, int& y, int& mo, int& d, int& h, int& mi, int& s) {
  return t.size() >= 19 && read_digits(t, 0, 4, y) && t[4] == '-' && read_digits(t, 5, 2, mo) &&
         t[7] == '-' && read_digits(t, 8, 2, d) && t[10] == 'T' && read_digits(t, 11, 2, h) &&
         t[13] == ':' && read_digits(t, 14, 2, mi) && t[16] == ':' && read_digits(t, 17, 2, s);
}

}  // namespace

std::optional<Timestamp> Timestamp::parse(std::string_view t) {
  int y, mo, d, h, mi, s, ms;
  if (t.size() != 24 || !parse_datetime(t, y, mo, d, h, mi, s)) return std::nullopt;
  if (t[19] != '.' || !read_digits(t, 20, 3, ms) || t[23] != 'Z') return std::nullopt;
  return assemble(y, mo, d, h, mi, s, ms);
}

Timestamp Timestamp::parse_or_throw(std::string_view text) {
  auto ts = parse(text);
  if (!ts) throw Error(ErrorCode::BadTimestamp, "not a canonical RFC 3339 timestamp: '" + std::string(text) + "'");
  return *ts;
}

std::optional<Timestamp> Timestamp::parse_lenient(std::string_view t) {
  if (auto canonical = parse(t)) return canonical;
  int y, mo, d, h = 0, mi = 0, s = 0, ms = 0;
  if (t.size() == 10) {
    if (!read_digits(t, 0, 4, y) || t[4] != '-' || !read_digits(t, 5, 2, mo) || t[7] != '-' ||
        !read_digits(t, 8, 2, d))
      return std::nullopt;
    return assemble(y, mo, d, 0, 0, 0, 0);
  }
  if (!parse_datetime(t, y, mo, d, h, mi, s)) return std::nullopt;
  std::size_t pos = 19;
  if (pos < t.size() && t[pos] == '.') {
    ++pos;
    std::size_t digits = 0;
    int frac = 0;
    while (pos < t.size() && t[pos] >= '0' && t[pos] <= '9' && digits < 3) {
      frac = frac * 10 + (t[pos] - '0');
      ++pos;
      ++digits;
    }
    if (digits == 0) return std::nullopt;
    for (std::size_t i = digits; i < 3; ++i) frac *= 10;
    ms = frac;
  }
  if (pos + 1 != t.size() || t[pos] != 'Z') return std::nullopt;
  return assemble(y, mo, d, h, mi, s, ms);
}

Timestamp Timestamp::now() {
  const auto since = std::chrono::system_clock::now().time_since_epoch();
  return from_unix_ms(std::chrono::duration_cast<std::chrono::milliseconds>(since).count());
}

std::string Timestamp::to_string() const {
  std::int64_t days = ms_ / 86400000;
  std::int64_t rem = ms_ % 86400000;
  if (rem < 0) {
    rem += 86400000;
    --days;
  }
  const Civil c = civil_from_days(days);
  const auto secs = rem / 1000;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ", static_cast<long long>(c.y), c.m,
                c.d, static_cast<long long>(secs / 3600), static_cast<long long>(secs / 60 % 60),
                static_cast<long long>(secs % 60), static_cast<long long>(rem % 1000));
  return buf;
}

}  // namespace codetrail
