#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace polmine {

using UtcTime = std::chrono::sys_seconds;
using Date = std::chrono::year_month_day;

// Strict ISO-8601 instant in UTC: YYYY-MM-DDTHH:MM:SS[.fraction]Z.
std::optional<UtcTime> parse_iso_utc(std::string_view s);
std::string format_iso_utc(UtcTime t);

// YYYY-MM-DD
std::optional<Date> parse_date(std::string_view s);
std::string format_date(Date d);

// Wall-clock minute as printed on a page, without zone.
struct LocalMinute {
  Date date;
  int hour = 0;
  int minute = 0;

  friend bool operator==(const LocalMinute&, const LocalMinute&) = default;
};

// YYYY-MM-DDTHH:MM
std::optional<LocalMinute> parse_local_minute(std::string_view s);
std::string format_local_minute(const LocalMinute& t);

}  // namespace polmine
