#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "stepcast/records.hpp"

namespace stepcast {

enum class Granularity { hourly, daily };
enum class CoarsePolicy { drop, split };

Granularity granularity_from_string(const std::string& s);
const char* to_string(Granularity g);
CoarsePolicy coarse_policy_from_string(const std::string& s);
const char* to_string(CoarsePolicy p);

struct PipelineConfig {
  StudyPeriod study_period{{1990, 1, 1}, {2089, 12, 31}};
  Granularity granularity = Granularity::hourly;
  double outlier_q = 0.05;               // two-sided quantile cut
  bool outlier_removal_enabled = true;
  CoarsePolicy coarse_record_policy = CoarsePolicy::drop;
  bool imputation_enabled = false;
  int active_start_hour = 8;             // [start, end) active hours
  int active_end_hour = 22;
  int window_days = 3;                   // drives user filtering

  int active_hour_count() const { return active_end_hour - active_start_hour; }
  void validate() const;  // throws std::invalid_argument

  std::string to_json() const;
  static PipelineConfig from_json(const std::string& text);
  static PipelineConfig from_json_file(const std::string& path);
};

// One cleaned day: 24 hourly buckets plus a presence mask. Slots that
// received no record carry value 0 with present = 0.
struct DayRow {
  Date date;
  std::array<int64_t, 24> steps{};
  std::array<uint8_t, 24> present{};

  int64_t total() const {
    int64_t t = 0;
    for (int64_t v : steps) t += v;
    return t;
  }
  bool operator==(const DayRow&) const = default;
};

// A user's cleaned, per-hour step series; dates strictly increasing.
struct HourlyGrid {
  std::string user_id;
  std::vector<DayRow> days;
  bool operator==(const HourlyGrid&) const = default;
};

struct DayTotal {
  Date date;
  int64_t total = 0;
  bool operator==(const DayTotal&) const = default;
};

struct DailySeries {
  std::string user_id;
  std::vector<DayTotal> days;
  bool operator==(const DailySeries&) const = default;
};

struct PipelineStats {
  int64_t records_in = 0;
  int64_t duplicates_removed = 0;
  int64_t out_of_period_removed = 0;
  int64_t coarse_records_dropped = 0;
  int64_t coarse_records_split = 0;
  int64_t user_days_resampled = 0;
  int64_t outlier_days_removed = 0;
  int64_t users_before_user_filter = 0;
  int64_t users_removed_by_filter = 0;
  int64_t days_removed_by_filter = 0;
  int64_t zeros_imputed = 0;
  int64_t users_out = 0;
  int64_t user_days_out = 0;

  std::string to_json(const PipelineConfig& config) const;
};

struct PipelineResult {
  Granularity granularity = Granularity::hourly;
  std::vector<HourlyGrid> hourly;   // populated when granularity == hourly
  std::vector<DailySeries> daily;   // populated when granularity == daily
  PipelineStats stats;
};

// --- cleaning stages (fixed composition order in run_pipeline) ---------

// Keeps at most one record per (user_id, start_time, end_time); when
// duplicates disagree on steps, the maximum wins. First-occurrence order
// is preserved.
std::vector<RawRecord> deduplicate(const std::vector<RawRecord>& records);

// Keeps records whose start date lies within the study period.
std::vector<RawRecord> filter_study_period(const std::vector<RawRecord>& records,
                                           const StudyPeriod& period);

// Buckets records into per-user hourly grids. Records of duration <= 1h
// contribute their full value to the hour of their start time; coarser
// records are dropped or split across the day's active hours per policy.
// Grids are ordered by user_id; days by date.
std::vector<HourlyGrid> resample_hourly(const std::vector<RawRecord>& records,
                                        const PipelineConfig& config,
                                        PipelineStats* stats = nullptr);

std::vector<DailySeries> to_daily(const std::vector<HourlyGrid>& grids);

// Two-sided quantile cut on the population distribution of user-day
// totals (linear-interpolation estimator). Days strictly outside
// [Q(q), Q(1-q)] are dropped; users left with no days disappear.
void remove_outlier_days(std::vector<HourlyGrid>& grids, double q, PipelineStats* stats = nullptr);
void remove_outlier_days(std::vector<DailySeries>& series, double q, PipelineStats* stats = nullptr);

// Keeps only users owning at least one run of window_days+1 consecutive
// dates, and within them only the days belonging to such runs.
void filter_users(std::vector<HourlyGrid>& grids, int window_days, PipelineStats* stats = nullptr);
void filter_users(std::vector<DailySeries>& series, int window_days, PipelineStats* stats = nullptr);

// Replaces zero-valued active-hour buckets with the user's median nonzero
// value for the same hour of day (rounded half-up); buckets outside the
// active hours are never touched.
void impute_zeros(HourlyGrid& grid, int active_start_hour, int active_end_hour,
                  PipelineStats* stats = nullptr);

// dedupe -> study period -> resample -> outlier days -> user filter ->
// imputation, deterministically.
PipelineResult run_pipeline(const std::vector<RawRecord>& records, const PipelineConfig& config);

// Linear-interpolation empirical quantile of a sorted sample.
double quantile_sorted(const std::vector<double>& sorted_values, double p);

// --- serialization ------------------------------------------------------

// Versioned NDJSON, one user per line.
void write_grids_ndjson(std::ostream& out, const std::vector<HourlyGrid>& grids);
void write_grids_ndjson(std::ostream& out, const std::vector<DailySeries>& series);
void write_result_ndjson_file(const std::string& path, const PipelineResult& result);

struct GridsDocument {
  Granularity granularity = Granularity::hourly;
  std::vector<HourlyGrid> hourly;
  std::vector<DailySeries> daily;
};
GridsDocument read_grids_ndjson(std::istream& in);
GridsDocument read_grids_ndjson_file(const std::string& path);

}  // namespace stepcast
