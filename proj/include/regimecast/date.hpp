#pragma once

#include <charconv>
#include <chrono>
#include <cstdio>
#include <string>
#include <string_view>

#include "regimecast/error.hpp"

namespace regimecast {

using Date = std::chrono::sys_days;

namespace detail {

inline bool parse_int(std::string_view text, int& out) {
  if (text.empty()) return false;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

}  // namespace detail

// Strict YYYY-MM-DD.
inline bool try_parse_date(std::string_view text, Date& out) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
  int y = 0, m = 0, d = 0;
  if (!detail::parse_int(text.substr(0, 4), y) ||
      !detail::parse_int(text.substr(5, 2), m) ||
      !detail::parse_int(text.substr(8, 2), d)) {
    return false;
  }
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return false;
  out = Date{ymd};
  return true;
}

inline Date parse_date(std::string_view text) {
  Date out;
  if (!try_parse_date(text, out)) {
    fail(ErrorKind::domain, "invalid date '" + std::string(text) + "' (expected YYYY-MM-DD)");
  }
  return out;
}

inline std::string format_date(Date date) {
  const std::chrono::year_month_day ymd{date};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

inline Date add_days(Date date, long long days) { return date + std::chrono::days{days}; }

// Signed day difference b - a.
inline long long days_between(Date a, Date b) { return (b - a).count(); }

}  // namespace regimecast
