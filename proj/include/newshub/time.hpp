#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace newshub {

using Timestamp = std::chrono::sys_seconds;

// RFC-3339 / ISO-8601 with a mandatory offset ("Z" or "+hh:mm"). Fractional
// seconds are accepted and truncated. Returns nullopt on malformed input.
std::optional<Timestamp> parse_rfc3339(std::string_view text);

// RFC-822 / RFC-2822 dates as found in RSS <pubDate>, e.g.
// "Tue, 10 Jun 2003 04:00:00 GMT" or "10 Jun 2003 04:00 +0200".
std::optional<Timestamp> parse_rfc822(std::string_view text);

// Tries RFC-3339 first, then RFC-822.
std::optional<Timestamp> parse_timestamp(std::string_view text);

// Always UTC with a trailing "Z", second resolution.
std::string format_rfc3339(Timestamp ts);

Timestamp make_timestamp(int year, unsigned month, unsigned day, int hour = 0,
                         int minute = 0, int second = 0);

Timestamp now_utc();

}  // namespace newshub
