#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "stepcast/time.hpp"

namespace stepcast {

// One device-reported step measurement for one user over a time interval.
struct RawRecord {
  std::string user_id;
  DateTime start_time;
  DateTime end_time;  // >= start_time
  int64_t steps = 0;  // >= 0
  std::string source;  // optional device/app tag; may be empty

  bool operator==(const RawRecord&) const = default;

  int64_t duration_seconds() const { return stepcast::duration_seconds(start_time, end_time); }
};

struct StudyPeriod {
  Date start_date;
  Date end_date;  // >= start_date

  bool contains(const Date& d) const { return start_date <= d && d <= end_date; }
};

struct ParseReport {
  int64_t rows_read = 0;
  int64_t rows_accepted = 0;
  int64_t rows_rejected = 0;
  std::vector<std::pair<int64_t, std::string>> rejection_reasons;  // (line number, reason)

  bool reconciles() const { return rows_read == rows_accepted + rows_rejected; }
};

}  // namespace stepcast
