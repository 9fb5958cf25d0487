#include "stepcast/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "stepcast/kernels.hpp"

namespace stepcast {

using ordered_json = nlohmann::ordered_json;

double mae(const std::vector<double>& y, const std::vector<double>& yhat) {
  if (y.empty() || y.size() != yhat.size()) throw std::invalid_argument("mae: bad input sizes");
  return kernels::abs_err_sum(y.data(), yhat.data(), y.size()) / static_cast<double>(y.size());
}

double mdae(const std::vector<double>& y, const std::vector<double>& yhat) {
  if (y.empty() || y.size() != yhat.size()) throw std::invalid_argument("mdae: bad input sizes");
  std::vector<double> abs_err(y.size());
  for (size_t i = 0; i < y.size(); ++i) abs_err[i] = std::fabs(y[i] - yhat[i]);
  std::sort(abs_err.begin(), abs_err.end());
  const size_t n = abs_err.size();
  if (n % 2 == 1) return abs_err[n / 2];
  return (abs_err[n / 2 - 1] + abs_err[n / 2]) / 2.0;
}

CvFolds ts_cv_folds(size_t n, int k) {
  if (k < 1) throw std::invalid_argument("ts_cv_folds: k must be >= 1");
  if (n < static_cast<size_t>(k) + 1) {
    throw std::invalid_argument("ts_cv_folds: need n >= k+1 examples");
  }
  const size_t b = n / (static_cast<size_t>(k) + 1);
  CvFolds out;
  out.k = k;
  for (int i = 1; i <= k; ++i) {
    const size_t cut = static_cast<size_t>(i) * b;
    out.folds.push_back(CvFold{0, cut, cut, cut + b});
  }
  return out;
}

namespace {

WindowedDataset slice_dataset(const WindowedDataset& ds, size_t begin, size_t end) {
  WindowedDataset out;
  out.feature_names = ds.feature_names;
  out.meta = ds.meta;
  out.examples.assign(ds.examples.begin() + static_cast<long>(begin),
                      ds.examples.begin() + static_cast<long>(end));
  return out;
}

double raw_mae_of(const Regressor& model, const WindowedDataset& scaled, const Scaler& scaler) {
  const Matrix X = feature_matrix(scaled);
  std::vector<double> pred = invert_target(scaler, model.predict(X));
  std::vector<double> truth = target_vector(scaled);
  for (auto& t : truth) t = invert_target(scaler, t);
  return mae(truth, pred);
}

}  // namespace

GridSearchResult grid_search(ModelFamily family, const std::vector<std::string>& grid,
                             const WindowedDataset& train_scaled, const Scaler& scaler, int k) {
  if (grid.empty()) throw std::invalid_argument("grid_search: empty grid");
  CvFolds folds = ts_cv_folds(train_scaled.size(), k);

  GridSearchResult result;
  result.points.reserve(grid.size());
  double best = std::numeric_limits<double>::infinity();
  bool any_ok = false;

  for (size_t gi = 0; gi < grid.size(); ++gi) {
    GridPointResult point;
    point.config_json = grid[gi];
    double total = 0.0;
    try {
      for (const CvFold& f : folds.folds) {
        WindowedDataset ftrain = slice_dataset(train_scaled, f.train_begin, f.train_end);
        WindowedDataset fval = slice_dataset(train_scaled, f.val_begin, f.val_end);
        FitOutput fit = fit_family(family, grid[gi], ftrain, fval, scaler, "");
        auto model = instantiate(fit.doc);
        total += raw_mae_of(*model, fval, scaler);
      }
      point.mean_val_mae = total / static_cast<double>(folds.folds.size());
      if (point.mean_val_mae < best) {
        best = point.mean_val_mae;
        result.best_index = gi;
        result.best_config_json = grid[gi];
      }
      any_ok = true;
    } catch (const std::exception& e) {
      point.failed = true;
      point.error = e.what();
    }
    result.points.push_back(std::move(point));
  }
  if (!any_ok) throw std::runtime_error("grid_search: every grid point failed");
  return result;
}

std::vector<std::string> default_grid(ModelFamily family) {
  auto dump = [](ordered_json j) { return j.dump(); };
  std::vector<std::string> grid;
  switch (family) {
    case ModelFamily::ridge:
      for (double lambda : {0.1, 1.0, 10.0, 100.0}) {
        grid.push_back(dump({{"lambda", lambda}}));
      }
      break;
    case ModelFamily::tree:
      for (int depth : {3, 5, 10, -1}) {
        grid.push_back(dump({{"max_depth", depth}}));
      }
      break;
    case ModelFamily::gb:
      for (int stages : {100, 300}) {
        for (double lr : {0.05, 0.1}) {
          for (double sub : {0.7, 1.0}) {
            grid.push_back(dump({{"n_stages", stages}, {"learning_rate", lr}, {"subsample", sub}}));
          }
        }
      }
      break;
    case ModelFamily::mlp:
      for (double lr : {1e-3, 1e-2}) {
        ordered_json j{{"hidden", {64, 32}}};
        j["train"] = {{"learning_rate", lr}, {"max_epochs", 40}, {"patience", 5}};
        grid.push_back(j.dump());
      }
      break;
    case ModelFamily::cnn:
      for (int ks : {6, 12}) {
        ordered_json j{{"conv_channels", {8}}, {"kernel_size", ks}, {"dense", {32}}};
        j["train"] = {{"max_epochs", 40}, {"patience", 5}};
        grid.push_back(j.dump());
      }
      break;
    case ModelFamily::lstm:
      for (int hidden : {32, 64}) {
        ordered_json j{{"lstm_layers", 2}, {"lstm_hidden", hidden}};
        j["train"] = {{"max_epochs", 30}, {"patience", 5}};
        grid.push_back(j.dump());
      }
      break;
    case ModelFamily::baseline:
      grid.push_back("{}");
      break;
  }
  return grid;
}

std::string default_config(ModelFamily family) {
  switch (family) {
    case ModelFamily::ridge: return ridge_config_to_json(RidgeConfig{});
    case ModelFamily::tree: return tree_config_to_json(TreeConfig{});
    case ModelFamily::gb: return gb_config_to_json(GBConfig{});
    case ModelFamily::mlp:
    case ModelFamily::cnn:
    case ModelFamily::lstm: {
      NetConfig nc;
      nc.arch = family == ModelFamily::mlp ? Arch::mlp
                : family == ModelFamily::cnn ? Arch::cnn1d
                                             : Arch::lstm;
      ordered_json j = ordered_json::parse(net_config_to_json(nc));
      j["train"] = ordered_json::parse(train_config_to_json(TrainConfig{}));
      return j.dump();
    }
    case ModelFamily::baseline: return "{}";
  }
  return "{}";
}

// ----------------------------------------------------------------------
// benchmark
// ----------------------------------------------------------------------

EvalReport benchmark(const std::vector<NamedModel>& models, const WindowedDataset& train_scaled,
                     const WindowedDataset& test_scaled, const Scaler& scaler,
                     const std::string& dataset_fingerprint) {
  EvalReport report;
  report.dataset_fingerprint = dataset_fingerprint;

  const Matrix Xtrain = feature_matrix(train_scaled);
  const Matrix Xtest = feature_matrix(test_scaled);
  std::vector<double> ytrain = target_vector(train_scaled);
  std::vector<double> ytest = target_vector(test_scaled);
  for (auto& t : ytrain) t = invert_target(scaler, t);
  for (auto& t : ytest) t = invert_target(scaler, t);

  for (const auto& m : models) {
    EvalRow row;
    row.name = m.name;
    row.family = m.family;
    std::vector<double> ptrain = invert_target(scaler, m.regressor->predict(Xtrain));
    std::vector<double> ptest = invert_target(scaler, m.regressor->predict(Xtest));
    row.train_mae = mae(ytrain, ptrain);
    row.train_mdae = mdae(ytrain, ptrain);
    row.test_mae = mae(ytest, ptest);
    row.test_mdae = mdae(ytest, ptest);
    report.rows.push_back(std::move(row));
    report.configs_json.push_back(m.config_json);
  }
  return report;
}

std::string EvalReport::to_json() const {
  ordered_json j;
  j["dataset_fingerprint"] = dataset_fingerprint;
  auto& arr = j["models"] = ordered_json::array();
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    ordered_json rj;
    rj["name"] = r.name;
    rj["family"] = r.family;
    rj["train"] = {{"mae", r.train_mae}, {"mdae", r.train_mdae}};
    rj["test"] = {{"mae", r.test_mae}, {"mdae", r.test_mdae}};
    if (i < configs_json.size() && !configs_json[i].empty()) {
      rj["config"] = ordered_json::parse(configs_json[i]);
    }
    arr.push_back(std::move(rj));
  }
  return j.dump(2);
}

std::string EvalReport::to_text() const {
  size_t name_w = 5;
  for (const auto& r : rows) name_w = std::max(name_w, r.name.size());
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-*s  %-7s  %12s  %12s\n", static_cast<int>(name_w), "Model",
                "Dataset", "MAE", "MdAE");
  out << line;
  out << std::string(name_w + 2 + 7 + 2 + 12 + 2 + 12, '-') << '\n';
  for (const auto& r : rows) {
    std::snprintf(line, sizeof(line), "%-*s  %-7s  %12.3f  %12.3f\n", static_cast<int>(name_w),
                  r.name.c_str(), "Train", r.train_mae, r.train_mdae);
    out << line;
    std::snprintf(line, sizeof(line), "%-*s  %-7s  %12.3f  %12.3f\n", static_cast<int>(name_w), "",
                  "Test", r.test_mae, r.test_mdae);
    out << line;
  }
  return out.str();
}

// ----------------------------------------------------------------------
// sweep
// ----------------------------------------------------------------------

FeatureConfig feature_preset(const std::string& name) {
  FeatureConfig fc;
  if (name == "steps") return fc;
  if (name == "date") {
    fc.include_date_features = true;
    fc.include_calendar_flags = true;
    return fc;
  }
  if (name == "cyclic") {
    fc.include_cyclic = true;
    return fc;
  }
  if (name == "all") {
    fc.include_date_features = true;
    fc.include_calendar_flags = true;
    fc.include_cyclic = true;
    return fc;
  }
  throw std::invalid_argument("unknown feature preset: " + name);
}

SweepSpec SweepSpec::from_json(const std::string& text) {
  SweepSpec s;
  if (text.empty()) return s;
  auto j = nlohmann::json::parse(text);
  if (j.contains("granularities")) {
    s.granularities.clear();
    for (const auto& g : j["granularities"]) {
      s.granularities.push_back(granularity_from_string(g.get<std::string>()));
    }
  }
  if (j.contains("window_days")) s.window_days = j["window_days"].get<std::vector<int>>();
  if (j.contains("outlier_removal")) s.outlier_removal = j["outlier_removal"].get<std::vector<bool>>();
  if (j.contains("feature_presets")) {
    s.feature_presets = j["feature_presets"].get<std::vector<std::string>>();
  }
  if (j.contains("split")) {
    s.ratios.train = j["split"].at(0).get<double>();
    s.ratios.val = j["split"].at(1).get<double>();
    s.ratios.test = j["split"].at(2).get<double>();
  }
  if (j.contains("probe")) s.probe_config_json = j["probe"].dump();
  return s;
}

std::string SweepSpec::to_json() const {
  ordered_json j;
  auto& g = j["granularities"] = ordered_json::array();
  for (auto gr : granularities) g.push_back(to_string(gr));
  j["window_days"] = window_days;
  j["outlier_removal"] = outlier_removal;
  j["feature_presets"] = feature_presets;
  j["split"] = {ratios.train, ratios.val, ratios.test};
  if (!probe_config_json.empty()) j["probe"] = ordered_json::parse(probe_config_json);
  return j.dump(2);
}

SweepReport config_sweep(const std::vector<RawRecord>& records, const PipelineConfig& base,
                         const SweepSpec& spec) {
  SweepReport report;
  for (Granularity g : spec.granularities) {
    for (int w : spec.window_days) {
      for (bool outliers : spec.outlier_removal) {
        for (const auto& preset : spec.feature_presets) {
          SweepCell cell;
          cell.granularity = g;
          cell.window_days = w;
          cell.outlier_removal = outliers;
          cell.feature_preset = preset;

          PipelineConfig pc = base;
          pc.granularity = g;
          pc.window_days = w;
          pc.outlier_removal_enabled = outliers;
          PipelineResult pr = run_pipeline(records, pc);

          WindowConfig wc;
          wc.window_days = w;
          wc.granularity = g;
          FeatureConfig fc = feature_preset(preset);
          WindowedDataset ds = g == Granularity::hourly ? build_windows(pr.hourly, wc, fc)
                                                        : build_windows(pr.daily, wc, fc);
          DatasetSplits splits = chronological_split(ds, spec.ratios);
          cell.n_train = splits.train.size();
          cell.n_test = splits.test.size();
          if (splits.train.empty() || splits.test.empty()) {
            cell.empty = true;
            report.cells.push_back(std::move(cell));
            continue;
          }
          Scaler scaler = fit_scaler(splits.train);
          WindowedDataset train_scaled = apply_scaler(scaler, splits.train);
          WindowedDataset test_scaled = apply_scaler(scaler, splits.test);

          RidgeConfig probe = ridge_config_from_json(spec.probe_config_json);
          LinearModel m = ridge_fit(feature_matrix(train_scaled), target_vector(train_scaled), probe);

          std::vector<double> pred =
              invert_target(scaler, m.predict(feature_matrix(test_scaled)));
          std::vector<double> truth = target_vector(test_scaled);
          for (auto& t : truth) t = invert_target(scaler, t);
          cell.mae = mae(truth, pred);
          cell.mdae = mdae(truth, pred);
          report.cells.push_back(std::move(cell));
        }
      }
    }
  }
  return report;
}

std::string SweepReport::to_csv() const {
  std::ostringstream out;
  out << "granularity,window_days,features,outlier_removal,n_train,n_test,mae,mdae,status\n";
  char line[256];
  for (const auto& c : cells) {
    if (c.empty) {
      std::snprintf(line, sizeof(line), "%s,%d,%s,%d,%zu,%zu,,,empty\n", to_string(c.granularity),
                    c.window_days, c.feature_preset.c_str(), c.outlier_removal ? 1 : 0, c.n_train,
                    c.n_test);
    } else {
      std::snprintf(line, sizeof(line), "%s,%d,%s,%d,%zu,%zu,%.6f,%.6f,ok\n",
                    to_string(c.granularity), c.window_days, c.feature_preset.c_str(),
                    c.outlier_removal ? 1 : 0, c.n_train, c.n_test, c.mae, c.mdae);
    }
    out << line;
  }
  return out.str();
}

std::string SweepReport::to_json() const {
  ordered_json j = ordered_json::array();
  for (const auto& c : cells) {
    ordered_json cj;
    cj["granularity"] = to_string(c.granularity);
    cj["window_days"] = c.window_days;
    cj["features"] = c.feature_preset;
    cj["outlier_removal"] = c.outlier_removal;
    cj["n_train"] = c.n_train;
    cj["n_test"] = c.n_test;
    if (c.empty) {
      cj["status"] = "empty";
    } else {
      cj["status"] = "ok";
      cj["mae"] = c.mae;
      cj["mdae"] = c.mdae;
    }
    j.push_back(std::move(cj));
  }
  return j.dump(2);
}

}  // namespace stepcast
