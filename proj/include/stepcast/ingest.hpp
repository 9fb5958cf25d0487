#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "stepcast/records.hpp"

namespace stepcast {

enum class RecordFormat { csv, ndjson };
enum class ParseMode { strict, lenient };

inline constexpr const char* kCsvHeader = "user_id,start_time,end_time,steps,source";

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseResult {
  std::vector<RawRecord> records;
  ParseReport report;
};

// Parses raw step records from a byte stream. Input order is preserved.
// In lenient mode invalid rows are skipped and logged in the report; in
// strict mode the first invalid row aborts with its line number.
ParseResult parse_records(std::istream& in, RecordFormat format, ParseMode mode);

ParseResult parse_records_file(const std::string& path, RecordFormat format, ParseMode mode);

// Canonical NDJSON record stream: one object per line, fixed key order
// user_id, start_time, end_time, steps, source. Re-parsing the output
// yields the same records.
void write_records_ndjson(std::ostream& out, const std::vector<RawRecord>& records);
void write_records_ndjson_file(const std::string& path, const std::vector<RawRecord>& records);

std::string parse_report_to_json(const ParseReport& report);

RecordFormat record_format_from_string(const std::string& s);
ParseMode parse_mode_from_string(const std::string& s);

}  // namespace stepcast
