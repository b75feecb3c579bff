#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "codetrail/event/event.hpp"

namespace codetrail::integrity {

inline constexpr std::int64_t kDefaultCouplingWindowSeconds = 120;

/// (frac_a + frac_b) / 2, where frac_a is the share of a's timestamps with at
/// least one of b's within ±window_seconds (inclusive); 0 if either is empty.
/// Both lists must be ascending; throws Error{UnsortedInput} otherwise.
double temporal_coupling(std::span<const Timestamp> a, std::span<const Timestamp> b,
                         std::int64_t window_seconds = kDefaultCouplingWindowSeconds);

/// client_ts of the FileDiff / FileSave events, in input order.
std::vector<Timestamp> edit_times(std::span<const StoredEvent> events);

/// Same as above over the edit events of each list.
double temporal_coupling(std::span<const StoredEvent> a, std::span<const StoredEvent> b,
                         std::int64_t window_seconds = kDefaultCouplingWindowSeconds);

}  // namespace codetrail::integrity
