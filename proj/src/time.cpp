#include "stepcast/time.hpp"

#include <cstdio>

namespace stepcast {

namespace {

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static const int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap(y)) return 29;
  return kDays[m - 1];
}

}  // namespace

bool Date::valid() const {
  if (month < 1 || month > 12) return false;
  if (day < 1 || day > days_in_month(year, month)) return false;
  if (year < 1 || year > 9999) return false;
  return true;
}

// Civil-from-days / days-from-civil, era-based (Hinnant's algorithms).
int32_t Date::to_days() const {
  int y = year;
  unsigned m = static_cast<unsigned>(month);
  unsigned d = static_cast<unsigned>(day);
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<int>(doe) - 719468;
}

Date Date::from_days(int32_t z) {
  z += 719468;
  const int era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int y = static_cast<int>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return Date{y + (m <= 2), static_cast<int>(m), static_cast<int>(d)};
}

int Date::day_of_week() const {
  // 1970-01-01 is a Thursday (index 3 with Monday = 0).
  int32_t z = to_days();
  int d = static_cast<int>((z % 7 + 7 + 3) % 7);
  return d;
}

int Date::iso_week() const {
  // Week containing this date's Thursday determines the ISO year/week.
  int32_t days = to_days();
  int32_t thursday = days - ((day_of_week() + 7) % 7) + 3;
  Date t = from_days(thursday);
  int32_t jan1 = Date{t.year, 1, 1}.to_days();
  return static_cast<int>((thursday - jan1) / 7) + 1;
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

std::optional<Date> Date::parse(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  for (int i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (s[i] < '0' || s[i] > '9') return std::nullopt;
  }
  Date d;
  d.year = (s[0] - '0') * 1000 + (s[1] - '0') * 100 + (s[2] - '0') * 10 + (s[3] - '0');
  d.month = (s[5] - '0') * 10 + (s[6] - '0');
  d.day = (s[8] - '0') * 10 + (s[9] - '0');
  if (!d.valid()) return std::nullopt;
  return d;
}

DateTime DateTime::add_seconds(int64_t n) const {
  int64_t total = epoch_seconds() + n;
  int64_t days = total >= 0 ? total / 86400 : (total - 86399) / 86400;
  DateTime out;
  out.date = Date::from_days(static_cast<int32_t>(days));
  out.seconds = static_cast<int32_t>(total - days * 86400);
  return out;
}

std::string DateTime::to_string() const {
  char buf[24];
  int h = seconds / 3600, m = (seconds / 60) % 60, s = seconds % 60;
  std::snprintf(buf, sizeof(buf), "%sT%02d:%02d:%02d", date.to_string().c_str(), h, m, s);
  return buf;
}

std::optional<DateTime> DateTime::parse(const std::string& s) {
  if (s.size() != 19 || s[10] != 'T' || s[13] != ':' || s[16] != ':') return std::nullopt;
  auto d = Date::parse(s.substr(0, 10));
  if (!d) return std::nullopt;
  for (int i : {11, 12, 14, 15, 17, 18}) {
    if (s[i] < '0' || s[i] > '9') return std::nullopt;
  }
  int h = (s[11] - '0') * 10 + (s[12] - '0');
  int m = (s[14] - '0') * 10 + (s[15] - '0');
  int sec = (s[17] - '0') * 10 + (s[18] - '0');
  if (h > 23 || m > 59 || sec > 59) return std::nullopt;
  return DateTime{*d, h * 3600 + m * 60 + sec};
}

}  // namespace stepcast
