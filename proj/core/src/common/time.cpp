#include "kinodiff/common/time.hpp"

#include <charconv>

#include "kinodiff/common/error.hpp"
#include "kinodiff/common/format.hpp"

namespace kinodiff {

std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const auto yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

namespace {

int parse_int(std::string_view s, std::string_view whole) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InputError("malformed date/time '" + std::string(whole) + "'");
  }
  return v;
}

std::int64_t parse_date(std::string_view date) {
  if (date.size() != 10 || date[4] != '-' || date[7] != '-') {
    throw InputError("malformed date '" + std::string(date) + "'");
  }
  const int y = parse_int(date.substr(0, 4), date);
  const int m = parse_int(date.substr(5, 2), date);
  const int d = parse_int(date.substr(8, 2), date);
  if (m < 1 || m > 12 || d < 1 || d > 31) throw InputError("date out of range '" + std::string(date) + "'");
  return days_from_civil(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
}

double parse_clock(std::string_view time) {
  if (!time.empty() && time.back() == 'Z') time.remove_suffix(1);
  if (time.size() < 8 || time[2] != ':' || time[5] != ':') {
    throw InputError("malformed time '" + std::string(time) + "'");
  }
  const int hh = parse_int(time.substr(0, 2), time);
  const int mm = parse_int(time.substr(3, 2), time);
  const double ss = parse_double(std::string(time.substr(6)));
  if (hh > 23 || mm > 59 || ss < 0.0 || ss >= 61.0) throw InputError("time out of range '" + std::string(time) + "'");
  return hh * 3600.0 + mm * 60.0 + ss;
}

}  // namespace

double parse_date_time(std::string_view date, std::string_view time) {
  return static_cast<double>(parse_date(date)) * 86400.0 + parse_clock(time);
}

double parse_iso8601(std::string_view text) {
  if (text.size() < 19 || (text[10] != 'T' && text[10] != ' ')) {
    throw InputError("malformed ISO-8601 timestamp '" + std::string(text) + "'");
  }
  return parse_date_time(text.substr(0, 10), text.substr(11));
}

}  // namespace kinodiff
