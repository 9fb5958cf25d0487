#include "stepcast/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include <json.hpp>

namespace stepcast {

using ordered_json = nlohmann::ordered_json;

Granularity granularity_from_string(const std::string& s) {
  if (s == "hourly") return Granularity::hourly;
  if (s == "daily") return Granularity::daily;
  throw std::invalid_argument("unknown granularity: " + s);
}

const char* to_string(Granularity g) {
  return g == Granularity::hourly ? "hourly" : "daily";
}

CoarsePolicy coarse_policy_from_string(const std::string& s) {
  if (s == "drop") return CoarsePolicy::drop;
  if (s == "split") return CoarsePolicy::split;
  throw std::invalid_argument("unknown coarse_record_policy: " + s);
}

const char* to_string(CoarsePolicy p) {
  return p == CoarsePolicy::drop ? "drop" : "split";
}

void PipelineConfig::validate() const {
  if (!(outlier_q > 0.0 && outlier_q < 0.5)) {
    throw std::invalid_argument("outlier_q must lie in (0, 0.5)");
  }
  if (!(0 <= active_start_hour && active_start_hour < active_end_hour && active_end_hour <= 24)) {
    throw std::invalid_argument("active_hours must satisfy 0 <= start < end <= 24");
  }
  if (window_days < 1) throw std::invalid_argument("window_days must be >= 1");
  if (study_period.end_date < study_period.start_date) {
    throw std::invalid_argument("study_period end_date precedes start_date");
  }
}

std::string PipelineConfig::to_json() const {
  ordered_json j;
  j["study_period"] = {{"start_date", study_period.start_date.to_string()},
                       {"end_date", study_period.end_date.to_string()}};
  j["granularity"] = to_string(granularity);
  j["outlier_q"] = outlier_q;
  j["outlier_removal_enabled"] = outlier_removal_enabled;
  j["coarse_record_policy"] = to_string(coarse_record_policy);
  j["imputation_enabled"] = imputation_enabled;
  j["active_hours"] = {active_start_hour, active_end_hour};
  j["window_days"] = window_days;
  return j.dump(2);
}

PipelineConfig PipelineConfig::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  PipelineConfig c;
  if (j.contains("study_period")) {
    auto parse_date = [&](const char* key) {
      auto d = Date::parse(j["study_period"].at(key).get<std::string>());
      if (!d) throw std::invalid_argument(std::string("invalid study_period.") + key);
      return *d;
    };
    c.study_period.start_date = parse_date("start_date");
    c.study_period.end_date = parse_date("end_date");
  }
  if (j.contains("granularity")) c.granularity = granularity_from_string(j["granularity"]);
  if (j.contains("outlier_q")) c.outlier_q = j["outlier_q"].get<double>();
  if (j.contains("outlier_removal_enabled")) c.outlier_removal_enabled = j["outlier_removal_enabled"].get<bool>();
  if (j.contains("coarse_record_policy")) c.coarse_record_policy = coarse_policy_from_string(j["coarse_record_policy"]);
  if (j.contains("imputation_enabled")) c.imputation_enabled = j["imputation_enabled"].get<bool>();
  if (j.contains("active_hours")) {
    c.active_start_hour = j["active_hours"].at(0).get<int>();
    c.active_end_hour = j["active_hours"].at(1).get<int>();
  }
  if (j.contains("window_days")) c.window_days = j["window_days"].get<int>();
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::from_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

// ----------------------------------------------------------------------
// stages
// ----------------------------------------------------------------------

std::vector<RawRecord> deduplicate(const std::vector<RawRecord>& records) {
  // Keyed per user so identical timestamps from different users survive.
  struct Key {
    std::string user;
    int64_t start, end;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    size_t operator()(const Key& k) const {
      size_t h = std::hash<std::string>{}(k.user);
      h ^= std::hash<int64_t>{}(k.start) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      h ^= std::hash<int64_t>{}(k.end) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      return h;
    }
  };

  std::vector<RawRecord> out;
  out.reserve(records.size());
  std::unordered_map<Key, size_t, KeyHash> first_index;
  for (const auto& r : records) {
    Key k{r.user_id, r.start_time.epoch_seconds(), r.end_time.epoch_seconds()};
    auto [it, inserted] = first_index.try_emplace(k, out.size());
    if (inserted) {
      out.push_back(r);
    } else if (r.steps > out[it->second].steps) {
      out[it->second].steps = r.steps;  // overlapping devices under-report; keep the max
    }
  }
  return out;
}

std::vector<RawRecord> filter_study_period(const std::vector<RawRecord>& records,
                                           const StudyPeriod& period) {
  std::vector<RawRecord> out;
  out.reserve(records.size());
  for (const auto& r : records) {
    if (period.contains(r.start_time.date)) out.push_back(r);
  }
  return out;
}

namespace {

int64_t round_half_up(double v) {
  return static_cast<int64_t>(std::floor(v + 0.5));
}

}  // namespace

std::vector<HourlyGrid> resample_hourly(const std::vector<RawRecord>& records,
                                        const PipelineConfig& config,
                                        PipelineStats* stats) {
  // Fractional contributions only arise under the split policy; buckets
  // accumulate in double and materialize with round-half-up. Whole-record
  // sums stay exact (integer-valued doubles).
  struct DayAcc {
    std::array<double, 24> value{};
    std::array<uint8_t, 24> present{};
  };
  std::map<std::string, std::map<int32_t, DayAcc>> users;

  const int active_hours = config.active_hour_count();
  for (const auto& r : records) {
    const int64_t duration = r.duration_seconds();
    if (duration <= 3600) {
      auto& day = users[r.user_id][r.start_time.date.to_days()];
      int h = r.start_time.hour();
      day.value[h] += static_cast<double>(r.steps);
      day.present[h] = 1;
      continue;
    }
    if (config.coarse_record_policy == CoarsePolicy::drop) {
      if (stats) ++stats->coarse_records_dropped;
      continue;
    }
    // split: spread the value evenly across the active hours of the
    // record's start date.
    if (stats) ++stats->coarse_records_split;
    auto& day = users[r.user_id][r.start_time.date.to_days()];
    const double share = static_cast<double>(r.steps) / active_hours;
    for (int h = config.active_start_hour; h < config.active_end_hour; ++h) {
      day.value[h] += share;
      day.present[h] = 1;
    }
  }

  std::vector<HourlyGrid> out;
  out.reserve(users.size());
  for (auto& [user, days] : users) {
    HourlyGrid g;
    g.user_id = user;
    g.days.reserve(days.size());
    for (auto& [day_key, acc] : days) {
      DayRow row;
      row.date = Date::from_days(day_key);
      for (int h = 0; h < 24; ++h) {
        row.steps[h] = round_half_up(acc.value[h]);
        row.present[h] = acc.present[h];
      }
      g.days.push_back(row);
    }
    if (stats) stats->user_days_resampled += static_cast<int64_t>(g.days.size());
    out.push_back(std::move(g));
  }
  return out;
}

std::vector<DailySeries> to_daily(const std::vector<HourlyGrid>& grids) {
  std::vector<DailySeries> out;
  out.reserve(grids.size());
  for (const auto& g : grids) {
    DailySeries s;
    s.user_id = g.user_id;
    s.days.reserve(g.days.size());
    for (const auto& d : g.days) s.days.push_back({d.date, d.total()});
    out.push_back(std::move(s));
  }
  return out;
}

double quantile_sorted(const std::vector<double>& sorted_values, double p) {
  if (sorted_values.empty()) throw std::invalid_argument("quantile of empty sample");
  if (sorted_values.size() == 1) return sorted_values[0];
  const double h = p * static_cast<double>(sorted_values.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(h));
  const size_t hi = std::min(lo + 1, sorted_values.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return sorted_values[lo] + frac * (sorted_values[hi] - sorted_values[lo]);
}

namespace {

double day_total(const DayRow& d) { return static_cast<double>(d.total()); }
double day_total(const DayTotal& d) { return static_cast<double>(d.total); }

// Shared across the hourly/daily representations: drops days outside the
// population's [Q(q), Q(1-q)] band of day totals.
template <typename Series>
void remove_outliers_impl(std::vector<Series>& items, double q, PipelineStats* stats) {
  std::vector<double> totals;
  for (const auto& it : items) {
    for (const auto& d : it.days) totals.push_back(day_total(d));
  }
  if (totals.empty()) return;
  std::sort(totals.begin(), totals.end());
  const double lo = quantile_sorted(totals, q);
  const double hi = quantile_sorted(totals, 1.0 - q);

  for (auto& it : items) {
    auto new_end = std::remove_if(it.days.begin(), it.days.end(), [&](const auto& d) {
      const double t = day_total(d);
      const bool drop = t < lo || t > hi;
      if (drop && stats) ++stats->outlier_days_removed;
      return drop;
    });
    it.days.erase(new_end, it.days.end());
  }
  std::erase_if(items, [](const Series& s) { return s.days.empty(); });
}

// Keeps only days inside runs of >= window_days + 1 consecutive dates.
template <typename Series>
void filter_users_impl(std::vector<Series>& items, int window_days, PipelineStats* stats) {
  if (window_days < 1) throw std::invalid_argument("window_days must be >= 1");
  const int min_run = window_days + 1;
  if (stats) stats->users_before_user_filter = static_cast<int64_t>(items.size());

  for (auto& it : items) {
    auto& days = it.days;
    std::vector<char> keep(days.size(), 0);
    size_t i = 0;
    while (i < days.size()) {
      size_t j = i + 1;
      while (j < days.size() &&
             days[j].date.to_days() == days[j - 1].date.to_days() + 1) {
        ++j;
      }
      if (static_cast<int>(j - i) >= min_run) {
        for (size_t k = i; k < j; ++k) keep[k] = 1;
      }
      i = j;
    }
    size_t w = 0;
    for (size_t r = 0; r < days.size(); ++r) {
      if (keep[r]) {
        days[w++] = days[r];
      } else if (stats) {
        ++stats->days_removed_by_filter;
      }
    }
    days.resize(w);
  }
  if (stats) {
    stats->users_removed_by_filter = static_cast<int64_t>(
        std::count_if(items.begin(), items.end(), [](const Series& s) { return s.days.empty(); }));
  }
  std::erase_if(items, [](const Series& s) { return s.days.empty(); });
}

}  // namespace

void remove_outlier_days(std::vector<HourlyGrid>& grids, double q, PipelineStats* stats) {
  remove_outliers_impl(grids, q, stats);
}
void remove_outlier_days(std::vector<DailySeries>& series, double q, PipelineStats* stats) {
  remove_outliers_impl(series, q, stats);
}

void filter_users(std::vector<HourlyGrid>& grids, int window_days, PipelineStats* stats) {
  filter_users_impl(grids, window_days, stats);
}
void filter_users(std::vector<DailySeries>& series, int window_days, PipelineStats* stats) {
  filter_users_impl(series, window_days, stats);
}

void impute_zeros(HourlyGrid& grid, int active_start_hour, int active_end_hour,
                  PipelineStats* stats) {
  // Medians come from the pre-imputation grid; night hours keep their
  // zeros (inactivity there is plausible, not missingness).
  std::array<std::vector<int64_t>, 24> nonzero_by_hour;
  for (const auto& d : grid.days) {
    for (int h = active_start_hour; h < active_end_hour; ++h) {
      if (d.steps[h] > 0) nonzero_by_hour[h].push_back(d.steps[h]);
    }
  }
  std::array<int64_t, 24> fill{};
  std::array<bool, 24> has_fill{};
  for (int h = active_start_hour; h < active_end_hour; ++h) {
    auto& v = nonzero_by_hour[h];
    if (v.empty()) continue;
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    double median = n % 2 == 1 ? static_cast<double>(v[n / 2])
                               : (static_cast<double>(v[n / 2 - 1]) + static_cast<double>(v[n / 2])) / 2.0;
    fill[h] = round_half_up(median);
    has_fill[h] = true;
  }
  for (auto& d : grid.days) {
    for (int h = active_start_hour; h < active_end_hour; ++h) {
      if (d.steps[h] == 0 && has_fill[h]) {
        d.steps[h] = fill[h];
        d.present[h] = 1;
        if (stats) ++stats->zeros_imputed;
      }
    }
  }
}

PipelineResult run_pipeline(const std::vector<RawRecord>& records, const PipelineConfig& config) {
  config.validate();
  PipelineResult result;
  result.granularity = config.granularity;
  PipelineStats& st = result.stats;
  st.records_in = static_cast<int64_t>(records.size());

  auto deduped = deduplicate(records);
  st.duplicates_removed = st.records_in - static_cast<int64_t>(deduped.size());

  auto in_period = filter_study_period(deduped, config.study_period);
  st.out_of_period_removed = static_cast<int64_t>(deduped.size() - in_period.size());

  auto grids = resample_hourly(in_period, config, &st);

  if (config.granularity == Granularity::hourly) {
    if (config.outlier_removal_enabled) remove_outlier_days(grids, config.outlier_q, &st);
    filter_users(grids, config.window_days, &st);
    if (config.imputation_enabled) {
      for (auto& g : grids) impute_zeros(g, config.active_start_hour, config.active_end_hour, &st);
    }
    st.users_out = static_cast<int64_t>(grids.size());
    for (const auto& g : grids) st.user_days_out += static_cast<int64_t>(g.days.size());
    result.hourly = std::move(grids);
  } else {
    auto series = to_daily(grids);
    if (config.outlier_removal_enabled) remove_outlier_days(series, config.outlier_q, &st);
    filter_users(series, config.window_days, &st);
    st.users_out = static_cast<int64_t>(series.size());
    for (const auto& s : series) st.user_days_out += static_cast<int64_t>(s.days.size());
    result.daily = std::move(series);
  }
  return result;
}

// ----------------------------------------------------------------------
// serialization
// ----------------------------------------------------------------------

std::string PipelineStats::to_json(const PipelineConfig& config) const {
  ordered_json j;
  j["config"] = ordered_json::parse(config.to_json());
  ordered_json s;
  s["records_in"] = records_in;
  s["duplicates_removed"] = duplicates_removed;
  s["out_of_period_removed"] = out_of_period_removed;
  s["coarse_records_dropped"] = coarse_records_dropped;
  s["coarse_records_split"] = coarse_records_split;
  s["user_days_resampled"] = user_days_resampled;
  s["outlier_days_removed"] = outlier_days_removed;
  s["users_before_user_filter"] = users_before_user_filter;
  s["users_removed_by_filter"] = users_removed_by_filter;
  s["days_removed_by_filter"] = days_removed_by_filter;
  s["zeros_imputed"] = zeros_imputed;
  s["users_out"] = users_out;
  s["user_days_out"] = user_days_out;
  j["stages"] = s;
  return j.dump(2);
}

void write_grids_ndjson(std::ostream& out, const std::vector<HourlyGrid>& grids) {
  for (const auto& g : grids) {
    ordered_json j;
    j["v"] = 1;
    j["granularity"] = "hourly";
    j["user_id"] = g.user_id;
    auto& days = j["days"] = ordered_json::array();
    for (const auto& d : g.days) {
      ordered_json dj;
      dj["date"] = d.date.to_string();
      dj["steps"] = d.steps;
      dj["present"] = d.present;
      days.push_back(std::move(dj));
    }
    out << j.dump() << '\n';
  }
}

void write_grids_ndjson(std::ostream& out, const std::vector<DailySeries>& series) {
  for (const auto& s : series) {
    ordered_json j;
    j["v"] = 1;
    j["granularity"] = "daily";
    j["user_id"] = s.user_id;
    auto& days = j["days"] = ordered_json::array();
    for (const auto& d : s.days) {
      days.push_back({{"date", d.date.to_string()}, {"total", d.total}});
    }
    out << j.dump() << '\n';
  }
}

void write_result_ndjson_file(const std::string& path, const PipelineResult& result) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  if (result.granularity == Granularity::hourly) {
    write_grids_ndjson(out, result.hourly);
  } else {
    write_grids_ndjson(out, result.daily);
  }
  out.flush();
  if (!out) throw std::runtime_error("I/O error writing " + path);
}

GridsDocument read_grids_ndjson(std::istream& in) {
  GridsDocument doc;
  bool first = true;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    if (j.at("v").get<int>() != 1) throw std::runtime_error("unsupported grids version");
    Granularity g = granularity_from_string(j.at("granularity").get<std::string>());
    if (first) {
      doc.granularity = g;
      first = false;
    } else if (g != doc.granularity) {
      throw std::runtime_error("mixed granularities in grids stream");
    }
    auto parse_date = [](const nlohmann::json& dj) {
      auto d = Date::parse(dj.get<std::string>());
      if (!d) throw std::runtime_error("invalid date in grids stream");
      return *d;
    };
    if (g == Granularity::hourly) {
      HourlyGrid grid;
      grid.user_id = j.at("user_id").get<std::string>();
      for (const auto& dj : j.at("days")) {
        DayRow row;
        row.date = parse_date(dj.at("date"));
        for (int h = 0; h < 24; ++h) {
          row.steps[h] = dj.at("steps").at(h).get<int64_t>();
          row.present[h] = dj.at("present").at(h).get<uint8_t>();
        }
        grid.days.push_back(row);
      }
      doc.hourly.push_back(std::move(grid));
    } else {
      DailySeries s;
      s.user_id = j.at("user_id").get<std::string>();
      for (const auto& dj : j.at("days")) {
        s.days.push_back({parse_date(dj.at("date")), dj.at("total").get<int64_t>()});
      }
      doc.daily.push_back(std::move(s));
    }
  }
  if (in.bad()) throw std::runtime_error("I/O error reading grids stream");
  return doc;
}

GridsDocument read_grids_ndjson_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open grids file: " + path);
  return read_grids_ndjson(in);
}

}  // namespace stepcast
