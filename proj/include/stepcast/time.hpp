#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>

namespace stepcast {

// Calendar date, naive local time. All bucketing in this library is done
// on the local calendar; there is no timezone arithmetic anywhere.
struct Date {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31

  auto operator<=>(const Date&) const = default;

  bool valid() const;
  int32_t to_days() const;  // days since 1970-01-01 (civil)
  static Date from_days(int32_t days);

  Date add_days(int32_t n) const { return from_days(to_days() + n); }

  int day_of_week() const;  // Monday = 0 .. Sunday = 6
  bool is_weekend() const { int d = day_of_week(); return d >= 5; }
  int iso_week() const;     // ISO-8601 week number, 1..53

  std::string to_string() const;  // YYYY-MM-DD
  static std::optional<Date> parse(const std::string& s);
};

// Second-resolution timestamp on the naive local calendar.
struct DateTime {
  Date date;
  int32_t seconds = 0;  // 0..86399

  auto operator<=>(const DateTime&) const = default;

  int hour() const { return seconds / 3600; }
  int64_t epoch_seconds() const {
    return static_cast<int64_t>(date.to_days()) * 86400 + seconds;
  }

  DateTime add_seconds(int64_t n) const;

  std::string to_string() const;  // YYYY-MM-DDTHH:MM:SS
  static std::optional<DateTime> parse(const std::string& s);
};

inline int64_t duration_seconds(const DateTime& a, const DateTime& b) {
  return b.epoch_seconds() - a.epoch_seconds();
}

}  // namespace stepcast
