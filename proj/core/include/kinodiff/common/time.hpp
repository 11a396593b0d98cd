#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace kinodiff {

/// Days since 1970-01-01 for a proleptic Gregorian date.
std::int64_t days_from_civil(std::int64_t year, unsigned month, unsigned day);

/// Parses "YYYY-MM-DD[T ]hh:mm:ss[.fff][Z]" as UTC seconds since the epoch.
/// Throws InputError on malformed text.
double parse_iso8601(std::string_view text);

/// Parses a date "YYYY-MM-DD" and a time "hh:mm:ss" given separately.
double parse_date_time(std::string_view date, std::string_view time);

}  // namespace kinodiff
