/*
 * Copyright 2026 The depstrat Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <charconv>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "depstrat/error.hpp"

namespace depstrat {

// Proleptic Gregorian calendar date, UTC.
struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  friend auto operator<=>(const Date&, const Date&) = default;
};

// Days since 1970-01-01 (H. Hinnant's civil algorithm).
inline std::int64_t days_from_civil(const Date& d) {
  const int y = d.year - (d.month <= 2 ? 1 : 0);
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned mp = static_cast<unsigned>(d.month > 2 ? d.month - 3 : d.month + 9);
  const unsigned doy = (153 * mp + 2) / 5 + static_cast<unsigned>(d.day) - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline Date civil_from_days(std::int64_t z) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp < 10 ? mp + 3 : mp - 9;
  const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400 + (m <= 2 ? 1 : 0);
  return Date{static_cast<int>(y), static_cast<int>(m), static_cast<int>(d)};
}

inline bool is_leap_year(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

inline int days_in_month(int year, int month) {
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return month == 2 && is_leap_year(year) ? 29 : kDays[month - 1];
}

namespace detail {

inline bool parse_fixed_int(std::string_view text, int& out) {
  if (text.empty()) return false;
  for (char c : text) {
    if (c < '0' || c > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace detail

// Accepts "YYYY-MM-DD" optionally followed by a time part
// ("2015-01-05 12:00:00 UTC", "2015-01-05T12:00:00Z"); the time is dropped.
inline Date parse_date(std::string_view text) {
  int y = 0, m = 0, d = 0;
  const bool ok = text.size() >= 10 && text[4] == '-' && text[7] == '-' &&
                  (text.size() == 10 || text[10] == ' ' || text[10] == 'T') &&
                  detail::parse_fixed_int(text.substr(0, 4), y) &&
                  detail::parse_fixed_int(text.substr(5, 2), m) &&
                  detail::parse_fixed_int(text.substr(8, 2), d) && m >= 1 && m <= 12 &&
                  d >= 1 && d <= days_in_month(y, m);
  if (!ok) {
    throw Error(ErrorCode::kMalformedInput, "bad date '" + std::string(text) + "'");
  }
  return Date{y, m, d};
}

inline std::string to_string(const Date& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
  return buf;
}

// Calendar month, used for monthly time series.
struct YearMonth {
  int year = 1970;
  int month = 1;

  friend auto operator<=>(const YearMonth&, const YearMonth&) = default;

  int index() const { return year * 12 + (month - 1); }
  static YearMonth from_index(int idx) { return YearMonth{idx / 12, idx % 12 + 1}; }
  YearMonth next() const { return from_index(index() + 1); }
  Date last_day() const { return Date{year, month, days_in_month(year, month)}; }
  static YearMonth of(const Date& d) { return YearMonth{d.year, d.month}; }
};

inline YearMonth parse_year_month(std::string_view text) {
  int y = 0, m = 0;
  if (text.size() != 7 || text[4] != '-' || !detail::parse_fixed_int(text.substr(0, 4), y) ||
      !detail::parse_fixed_int(text.substr(5, 2), m) || m < 1 || m > 12) {
    throw Error(ErrorCode::kMalformedInput, "bad month '" + std::string(text) + "' (want YYYY-MM)");
  }
  return YearMonth{y, m};
}

inline std::string to_string(const YearMonth& ym) {
  char buf[12];
  std::snprintf(buf, sizeof(buf), "%04d-%02d", ym.year, ym.month);
  return buf;
}

// Whole calendar months from `from` to `to`; the day of month is ignored.
inline int months_between(const Date& from, const Date& to) {
  return (to.year * 12 + to.month) - (from.year * 12 + from.month);
}

inline std::int64_t days_between(const Date& from, const Date& to) {
  return days_from_civil(to) - days_from_civil(from);
}

}  // namespace depstrat
