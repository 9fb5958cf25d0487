#include "stepcast/ingest.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace stepcast {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

std::vector<std::string> split_csv(const std::string& line) {
  // Plain comma split; the canonical schema has no quoted fields.
  std::vector<std::string> out;
  size_t pos = 0;
  while (true) {
    size_t comma = line.find(',', pos);
    if (comma == std::string::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
  return out;
}

bool parse_steps(const std::string& s, int64_t* out, std::string* reason) {
  if (s.empty()) {
    *reason = "missing steps";
    return false;
  }
  int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    *reason = "invalid steps";
    return false;
  }
  if (v < 0) {
    *reason = "negative steps";
    return false;
  }
  *out = v;
  return true;
}

// Validates one candidate record; fills *reason on failure.
bool finish_record(RawRecord* r, std::string* reason) {
  if (r->user_id.empty()) {
    *reason = "empty user_id";
    return false;
  }
  if (r->end_time < r->start_time) {
    *reason = "end before start";
    return false;
  }
  return true;
}

bool parse_csv_row(const std::string& line, RawRecord* r, std::string* reason) {
  auto fields = split_csv(line);
  if (fields.size() != 5) {
    *reason = "expected 5 fields, got " + std::to_string(fields.size());
    return false;
  }
  r->user_id = fields[0];
  auto st = DateTime::parse(fields[1]);
  if (!st) {
    *reason = "invalid start_time";
    return false;
  }
  auto et = DateTime::parse(fields[2]);
  if (!et) {
    *reason = "invalid end_time";
    return false;
  }
  r->start_time = *st;
  r->end_time = *et;
  if (!parse_steps(fields[3], &r->steps, reason)) return false;
  r->source = fields[4];
  return finish_record(r, reason);
}

bool parse_ndjson_row(const std::string& line, RawRecord* r, std::string* reason) {
  nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    *reason = "invalid JSON object";
    return false;
  }
  if (!j.contains("user_id") || !j["user_id"].is_string()) {
    *reason = "missing user_id";
    return false;
  }
  r->user_id = j["user_id"].get<std::string>();
  for (const char* key : {"start_time", "end_time"}) {
    if (!j.contains(key) || !j[key].is_string()) {
      *reason = std::string("missing ") + key;
      return false;
    }
  }
  auto st = DateTime::parse(j["start_time"].get<std::string>());
  if (!st) {
    *reason = "invalid start_time";
    return false;
  }
  auto et = DateTime::parse(j["end_time"].get<std::string>());
  if (!et) {
    *reason = "invalid end_time";
    return false;
  }
  r->start_time = *st;
  r->end_time = *et;
  if (!j.contains("steps") || !j["steps"].is_number_integer()) {
    *reason = j.contains("steps") ? "invalid steps" : "missing steps";
    return false;
  }
  r->steps = j["steps"].get<int64_t>();
  if (r->steps < 0) {
    *reason = "negative steps";
    return false;
  }
  if (j.contains("source") && j["source"].is_string()) {
    r->source = j["source"].get<std::string>();
  } else {
    r->source.clear();
  }
  return finish_record(r, reason);
}

}  // namespace

ParseResult parse_records(std::istream& in, RecordFormat format, ParseMode mode) {
  ParseResult result;
  std::string line;
  int64_t line_no = 0;

  if (format == RecordFormat::csv) {
    if (!std::getline(in, line)) {
      if (in.bad()) throw ParseError("I/O error reading input");
      throw ParseError("empty input: missing CSV header");
    }
    ++line_no;
    if (strip_cr(line) != kCsvHeader) {
      throw ParseError("line 1: CSV header does not match '" + std::string(kCsvHeader) + "'");
    }
  }

  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) continue;  // blank lines are not rows
    ++result.report.rows_read;

    RawRecord r;
    std::string reason;
    bool ok = format == RecordFormat::csv ? parse_csv_row(line, &r, &reason)
                                          : parse_ndjson_row(line, &r, &reason);
    if (ok) {
      ++result.report.rows_accepted;
      result.records.push_back(std::move(r));
    } else {
      if (mode == ParseMode::strict) {
        throw ParseError("line " + std::to_string(line_no) + ": " + reason);
      }
      ++result.report.rows_rejected;
      result.report.rejection_reasons.emplace_back(line_no, reason);
    }
  }
  if (in.bad()) throw ParseError("I/O error reading input");
  return result;
}

ParseResult parse_records_file(const std::string& path, RecordFormat format, ParseMode mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open input file: " + path);
  return parse_records(in, format, mode);
}

void write_records_ndjson(std::ostream& out, const std::vector<RawRecord>& records) {
  for (const auto& r : records) {
    ordered_json j;
    j["user_id"] = r.user_id;
    j["start_time"] = r.start_time.to_string();
    j["end_time"] = r.end_time.to_string();
    j["steps"] = r.steps;
    j["source"] = r.source;
    out << j.dump() << '\n';
  }
}

void write_records_ndjson_file(const std::string& path, const std::vector<RawRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open output file: " + path);
  write_records_ndjson(out, records);
  out.flush();
  if (!out) throw ParseError("I/O error writing " + path);
}

std::string parse_report_to_json(const ParseReport& report) {
  ordered_json j;
  j["rows_read"] = report.rows_read;
  j["rows_accepted"] = report.rows_accepted;
  j["rows_rejected"] = report.rows_rejected;
  auto& arr = j["rejection_reasons"] = ordered_json::array();
  for (const auto& [line, reason] : report.rejection_reasons) {
    arr.push_back({{"line", line}, {"reason", reason}});
  }
  return j.dump(2);
}

RecordFormat record_format_from_string(const std::string& s) {
  if (s == "csv") return RecordFormat::csv;
  if (s == "ndjson") return RecordFormat::ndjson;
  throw std::invalid_argument("unknown record format: " + s);
}

ParseMode parse_mode_from_string(const std::string& s) {
  if (s == "strict") return ParseMode::strict;
  if (s == "lenient") return ParseMode::lenient;
  throw std::invalid_argument("unknown parse mode: " + s);
}

}  // namespace stepcast
