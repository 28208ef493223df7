#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace bounty {

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

// "2026-10-16T09:30:00.000Z"
std::string format_timestamp(Timestamp t);
// Accepts the format above, with or without the millisecond part.
std::optional<Timestamp> parse_timestamp(std::string_view text);

std::chrono::sys_days utc_day(Timestamp t);
Timestamp next_utc_midnight(Timestamp t);

// Fractional days from `from` to `to`.
double days_between(Timestamp from, Timestamp to);

Timestamp now_ms();

}  // namespace bounty
