#include <doctest.h>

#include <sstream>

#include "stepcast/ingest.hpp"
#include "stepcast/time.hpp"

using namespace stepcast;

TEST_CASE("civil day conversions match known values") {
  struct Row {
    Date d;
    int32_t days;
    int dow;
    int week;
  };
  // References computed with an independent calendar implementation.
  const Row rows[] = {
      {{2015, 3, 2}, 16496, 0, 10},  {{2015, 3, 10}, 16504, 1, 11}, {{2015, 3, 14}, 16508, 5, 11},
      {{2015, 1, 1}, 16436, 3, 1},   {{2015, 12, 31}, 16800, 3, 53}, {{2016, 1, 1}, 16801, 4, 53},
      {{2016, 1, 4}, 16804, 0, 1},   {{2020, 12, 31}, 18627, 3, 53}, {{2021, 1, 1}, 18628, 4, 53},
      {{1970, 1, 1}, 0, 3, 1},       {{2000, 2, 29}, 11016, 1, 9},   {{2015, 6, 15}, 16601, 0, 25},
  };
  for (const auto& r : rows) {
    CAPTURE(r.d.to_string());
    CHECK(r.d.to_days() == r.days);
    CHECK(Date::from_days(r.days) == r.d);
    CHECK(r.d.day_of_week() == r.dow);
    CHECK(r.d.iso_week() == r.week);
  }
}

TEST_CASE("date and datetime parsing round-trips and validates") {
  CHECK(Date::parse("2015-03-10").value() == Date{2015, 3, 10});
  CHECK_FALSE(Date::parse("2015-02-29").has_value());  // not a leap year
  CHECK(Date::parse("2016-02-29").has_value());
  CHECK_FALSE(Date::parse("2015-13-01").has_value());
  CHECK_FALSE(Date::parse("2015-3-10").has_value());

  auto dt = DateTime::parse("2015-03-10T08:30:05");
  REQUIRE(dt.has_value());
  CHECK(dt->hour() == 8);
  CHECK(dt->to_string() == "2015-03-10T08:30:05");
  CHECK_FALSE(DateTime::parse("2015-03-10 08:30:05").has_value());
  CHECK_FALSE(DateTime::parse("2015-03-10T24:00:00").has_value());

  auto plus = dt->add_seconds(30 * 60);
  CHECK(plus.to_string() == "2015-03-10T09:00:05");
  CHECK(DateTime{{2015, 3, 10}, 23 * 3600}.add_seconds(7200).to_string() ==
        "2015-03-11T01:00:00");
}

TEST_CASE("weekend flag") {
  CHECK(Date{2015, 3, 14}.is_weekend());       // Saturday
  CHECK(Date{2015, 3, 15}.is_weekend());       // Sunday
  CHECK_FALSE(Date{2015, 3, 13}.is_weekend()); // Friday
}

namespace {

ParseResult parse_csv(const std::string& body, ParseMode mode = ParseMode::lenient) {
  std::istringstream in(std::string(kCsvHeader) + "\n" + body);
  return parse_records(in, RecordFormat::csv, mode);
}

}  // namespace

TEST_CASE("csv rows map onto records") {
  auto res = parse_csv("u1,2015-03-10T08:00:00,2015-03-10T08:30:00,512,\n");
  REQUIRE(res.records.size() == 1);
  const RawRecord& r = res.records[0];
  CHECK(r.user_id == "u1");
  CHECK(r.start_time.to_string() == "2015-03-10T08:00:00");
  CHECK(r.end_time.to_string() == "2015-03-10T08:30:00");
  CHECK(r.steps == 512);
  CHECK(r.source.empty());
  CHECK(res.report.rows_read == 1);
  CHECK(res.report.rows_accepted == 1);
}

TEST_CASE("invalid rows are rejected with reasons in lenient mode") {
  auto res = parse_csv(
      "u1,2015-03-10T08:00:00,2015-03-10T07:00:00,100,\n"
      "u1,2015-03-10T08:00:00,2015-03-10T08:30:00,-5,\n"
      "u1,not-a-time,2015-03-10T08:30:00,100,\n"
      "u1,2015-03-10T08:00:00,2015-03-10T08:30:00,100,phone\n");
  CHECK(res.report.rows_read == 4);
  CHECK(res.report.rows_accepted == 1);
  CHECK(res.report.rows_rejected == 3);
  CHECK(res.report.reconciles());
  REQUIRE(res.report.rejection_reasons.size() == 3);
  CHECK(res.report.rejection_reasons[0].second == "end before start");
  CHECK(res.report.rejection_reasons[1].second == "negative steps");
  CHECK(res.report.rejection_reasons[2].second == "invalid start_time");
  CHECK(res.records[0].source == "phone");
}

TEST_CASE("strict mode aborts with the line number") {
  CHECK_THROWS_WITH_AS(parse_csv("u1,2015-03-10T08:00:00,2015-03-10T07:00:00,100,\n",
                                 ParseMode::strict),
                       "line 2: end before start", ParseError);
}

TEST_CASE("header mismatch is an error") {
  std::istringstream in("user,start,end,steps\nu1,a,b,1\n");
  CHECK_THROWS_AS(parse_records(in, RecordFormat::csv, ParseMode::lenient), ParseError);
}

TEST_CASE("ndjson parsing accepts canonical lines and rejects garbage") {
  std::istringstream in(
      R"({"user_id":"u1","start_time":"2015-03-10T08:00:00","end_time":"2015-03-10T08:30:00","steps":512,"source":""})"
      "\n"
      R"({"user_id":"u2","start_time":"2015-03-10T08:00:00","end_time":"2015-03-10T08:30:00","steps":-2,"source":""})"
      "\n"
      "{not json}\n");
  auto res = parse_records(in, RecordFormat::ndjson, ParseMode::lenient);
  CHECK(res.records.size() == 1);
  CHECK(res.report.rows_rejected == 2);
  CHECK(res.report.rejection_reasons[0].second == "negative steps");
  CHECK(res.report.rejection_reasons[1].second == "invalid JSON object");
}

TEST_CASE("ndjson round-trip preserves records and order") {
  auto res = parse_csv(
      "u2,2015-03-10T09:00:00,2015-03-10T09:45:00,300,watch\n"
      "u1,2015-03-10T08:00:00,2015-03-10T08:30:00,512,\n"
      "u1,2015-03-11T10:00:00,2015-03-11T10:30:00,90,phone\n");
  REQUIRE(res.records.size() == 3);

  std::ostringstream out;
  write_records_ndjson(out, res.records);
  std::istringstream in(out.str());
  auto again = parse_records(in, RecordFormat::ndjson, ParseMode::strict);
  CHECK(again.records == res.records);

  // Idempotent: a second serialize-parse cycle is byte-identical.
  std::ostringstream out2;
  write_records_ndjson(out2, again.records);
  CHECK(out.str() == out2.str());
}
