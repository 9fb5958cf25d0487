#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "stepcast/pipeline.hpp"

namespace stepcast {

// Step values are always part of the feature vector; the flags opt into
// timestamp-derived extras.
struct FeatureConfig {
  bool include_steps = true;  // fixed true
  bool include_date_features = false;   // hour (hourly), dow, iso week, month
  bool include_cyclic = false;          // sin/cos pairs for hour, dow, month
  bool include_calendar_flags = false;  // is_weekend, is_holiday
  std::set<Date> holiday_dates;

  void validate() const;
  // Feature values contributed per slot (the step count included).
  int channels(Granularity g) const;
};

struct WindowConfig {
  int window_days = 3;
  Granularity granularity = Granularity::hourly;
  int stride_days = 0;  // 0 = default: W for hourly (tumbling), 1 for daily (sliding)

  int effective_stride() const {
    if (stride_days > 0) return stride_days;
    return granularity == Granularity::hourly ? window_days : 1;
  }
  void validate() const;
};

struct Example {
  std::string user_id;
  Date target_date;
  std::vector<double> features;
  double target = 0.0;  // next-day step total, raw steps
};

struct DatasetMeta {
  Granularity granularity = Granularity::hourly;
  int window_days = 3;
  int stride_days = 3;
  FeatureConfig features;
  int slots = 0;     // 24*W hourly, W daily
  int channels = 1;  // values per slot
};

// Supervised examples ordered by (target_date, user_id).
struct WindowedDataset {
  std::vector<Example> examples;
  std::vector<std::string> feature_names;
  DatasetMeta meta;

  size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
  size_t feature_count() const { return feature_names.size(); }
};

// (sin(2*pi*value/period), cos(2*pi*value/period)); period must be > 0.
std::pair<double, double> cyclic_pair(double value, double period);

// Appends one slot's feature values (and, when names != nullptr, their
// names with the given prefix). hour < 0 marks a daily slot.
void featurize_slot(double steps, const Date& date, int hour, const FeatureConfig& config,
                    std::vector<double>* out, std::vector<std::string>* names = nullptr,
                    const std::string& name_prefix = {});

WindowedDataset build_windows(const std::vector<HourlyGrid>& grids, const WindowConfig& wc,
                              const FeatureConfig& fc);
WindowedDataset build_windows(const std::vector<DailySeries>& series, const WindowConfig& wc,
                              const FeatureConfig& fc);

struct SplitRatios {
  double train = 0.70;
  double val = 0.15;
  double test = 0.15;
  void validate() const;  // nonnegative, sum 1 within 1e-9
};

struct DatasetSplits {
  WindowedDataset train, val, test;
};

// Contiguous chronological slices: |train| = floor(r_train*n),
// |val| = floor(r_val*n), remainder to test.
DatasetSplits chronological_split(const WindowedDataset& ds, const SplitRatios& ratios);

// Z-score standardization statistics fitted on the training split only.
struct Scaler {
  std::vector<double> feature_mean;
  std::vector<double> feature_std;  // zero-variance columns stored as 1
  double target_mean = 0.0;
  double target_std = 1.0;

  bool operator==(const Scaler&) const = default;
};

Scaler fit_scaler(const WindowedDataset& train);
WindowedDataset apply_scaler(const Scaler& s, const WindowedDataset& ds);
double invert_target(const Scaler& s, double scaled);
std::vector<double> invert_target(const Scaler& s, const std::vector<double>& scaled);

// --- serialization ------------------------------------------------------
// dataset.bin: little-endian binary with raw IEEE-754 doubles (bit-exact
// round trip); dataset.json: human-readable sidecar with feature names,
// scaler, configs and counts.

struct DatasetBundle {
  DatasetSplits splits;
  Scaler scaler;             // fitted on splits.train, applied to none
  std::string pipeline_config_json;  // pass-through for model documents; may be empty
};

void save_dataset(const std::string& bin_path, const std::string& sidecar_path,
                  const DatasetBundle& bundle);
DatasetBundle load_dataset(const std::string& bin_path);

// JSON helpers shared with the model document format.
std::string scaler_to_json(const Scaler& s);
Scaler scaler_from_json(const std::string& text);
std::string dataset_meta_to_json(const DatasetMeta& m);
DatasetMeta dataset_meta_from_json(const std::string& text);

}  // namespace stepcast
