#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stepcast/dataset.hpp"
#include "stepcast/models/model_io.hpp"

namespace stepcast {

// Mean / median absolute error. MdAE on an even count averages the two
// middle values. Empty input is rejected.
double mae(const std::vector<double>& y, const std::vector<double>& yhat);
double mdae(const std::vector<double>& y, const std::vector<double>& yhat);

// Expanding-window time-series cross-validation: block b = floor(n/(k+1)),
// fold i in 1..k trains on [0, i*b) and validates on [i*b, (i+1)*b).
struct CvFold {
  size_t train_begin, train_end;  // [begin, end)
  size_t val_begin, val_end;
};

struct CvFolds {
  int k = 5;
  std::vector<CvFold> folds;
};

CvFolds ts_cv_folds(size_t n, int k);

struct GridPointResult {
  std::string config_json;
  double mean_val_mae = 0.0;  // raw steps
  bool failed = false;
  std::string error;
};

struct GridSearchResult {
  size_t best_index = 0;
  std::string best_config_json;
  std::vector<GridPointResult> points;
};

// Exhaustive grid search over config candidates with k-fold expanding
// time-series CV on the (scaled) training split. Selection: minimum mean
// validation MAE in raw steps; ties keep the earliest grid point.
GridSearchResult grid_search(ModelFamily family, const std::vector<std::string>& grid,
                             const WindowedDataset& train_scaled, const Scaler& scaler, int k = 5);

// The stand-in hyperparameter grids used by `train --grid`.
std::vector<std::string> default_grid(ModelFamily family);
std::string default_config(ModelFamily family);

// --- benchmark ----------------------------------------------------------

struct EvalRow {
  std::string name;        // family label
  std::string family;
  double train_mae = 0.0, train_mdae = 0.0;
  double test_mae = 0.0, test_mdae = 0.0;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::string dataset_fingerprint;
  std::vector<std::string> configs_json;  // per row

  std::string to_json() const;
  std::string to_text() const;  // aligned Model/Dataset/MAE/MdAE table
};

struct NamedModel {
  std::string name;
  std::string family;
  std::string config_json;
  const Regressor* regressor;
};

// Errors are computed after inverting the target scaling, in raw steps,
// on the train and test splits.
EvalReport benchmark(const std::vector<NamedModel>& models, const WindowedDataset& train_scaled,
                     const WindowedDataset& test_scaled, const Scaler& scaler,
                     const std::string& dataset_fingerprint);

// --- configuration sweep --------------------------------------------------

struct SweepSpec {
  std::vector<Granularity> granularities{Granularity::hourly, Granularity::daily};
  std::vector<int> window_days{1, 2, 3, 4, 5, 6};
  std::vector<bool> outlier_removal{true};
  std::vector<std::string> feature_presets{"steps"};  // steps|date|cyclic|all
  SplitRatios ratios;
  std::string probe_config_json;  // ridge probe; "" = default

  static SweepSpec from_json(const std::string& text);
  std::string to_json() const;
};

struct SweepCell {
  Granularity granularity = Granularity::hourly;
  int window_days = 0;
  bool outlier_removal = true;
  std::string feature_preset;
  size_t n_train = 0, n_test = 0;
  double mae = 0.0, mdae = 0.0;
  bool empty = false;  // filtering emptied the dataset; not a failure
};

struct SweepReport {
  std::vector<SweepCell> cells;

  std::string to_csv() const;
  std::string to_json() const;
};

FeatureConfig feature_preset(const std::string& name);

// Runs pipeline -> windows -> split -> scale -> ridge probe per cell.
SweepReport config_sweep(const std::vector<RawRecord>& records, const PipelineConfig& base,
                         const SweepSpec& spec);

}  // namespace stepcast
