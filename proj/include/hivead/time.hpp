#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace hivead {

using Timestamp = std::chrono::sys_seconds;
using Day = std::chrono::sys_days;
using std::chrono::seconds;

/// Instant plus the UTC offset it was declared with.
struct ParsedTime {
  Timestamp utc;
  seconds offset{0};
  bool has_offset = false;
};

/// Accepts ISO-8601 (`2019-05-01T10:00:00Z`, `... +02:00`, space separator,
/// optional fractional seconds which are truncated) or integral epoch seconds.
std::optional<ParsedTime> parse_time(std::string_view text);

/// ISO-8601 rendering in the given offset, `Z` when the offset is zero.
std::string format_time(Timestamp ts, seconds offset = seconds{0});

/// Calendar day of `ts` as seen at `offset`.
Day local_day(Timestamp ts, seconds offset);

/// Start of `day` (local midnight) as a UTC instant.
Timestamp day_start(Day day, seconds offset);

std::string format_day(Day day);
std::optional<Day> parse_day(std::string_view text);

}  // namespace hivead
