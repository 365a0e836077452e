#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace ubf {

/// UTC instant with one-second resolution.
using Timestamp = std::chrono::sys_seconds;

/// Parses ISO-8601 date-times such as "2016-01-23T04:50:00Z",
/// "2016-01-23T04:50:00.123+0200" or "2016-01-23 04:50:00". A missing zone
/// designator means UTC. Fractional seconds are truncated.
/// Throws ParseError on anything else.
Timestamp parse_timestamp(std::string_view text);

/// Formats as "YYYY-MM-DDTHH:MM:SSZ".
std::string format_timestamp(Timestamp t);

/// Signed difference `to - from` in hours.
double hours_between(Timestamp from, Timestamp to);

/// Calendar day (UTC) containing `t`.
std::chrono::sys_days utc_date(Timestamp t);

}  // namespace ubf
