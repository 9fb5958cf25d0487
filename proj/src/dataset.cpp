#include "stepcast/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace stepcast {

using ordered_json = nlohmann::ordered_json;

void FeatureConfig::validate() const {
  if (!include_steps) throw std::invalid_argument("include_steps must be true");
}

int FeatureConfig::channels(Granularity g) const {
  const bool hourly = g == Granularity::hourly;
  int c = 1;  // steps
  if (include_date_features) c += hourly ? 4 : 3;  // [hour,] dow, week, month
  if (include_calendar_flags) c += 2;              // is_weekend, is_holiday
  if (include_cyclic) c += hourly ? 6 : 4;         // [hour,] dow, month pairs
  return c;
}

void WindowConfig::validate() const {
  if (window_days < 1) throw std::invalid_argument("window_days must be >= 1");
  if (stride_days < 0) throw std::invalid_argument("stride_days must be >= 1 (or 0 for default)");
}

std::pair<double, double> cyclic_pair(double value, double period) {
  if (!(period > 0.0)) throw std::invalid_argument("cyclic_pair: period must be > 0");
  const double angle = 2.0 * M_PI * value / period;
  return {std::sin(angle), std::cos(angle)};
}

void featurize_slot(double steps, const Date& date, int hour, const FeatureConfig& config,
                    std::vector<double>* out, std::vector<std::string>* names,
                    const std::string& name_prefix) {
  auto push = [&](const char* name, double v) {
    out->push_back(v);
    if (names) names->push_back(name_prefix + name);
  };
  push("steps", steps);
  if (config.include_date_features) {
    if (hour >= 0) push("hour", static_cast<double>(hour));
    push("dow", static_cast<double>(date.day_of_week()));
    push("week", static_cast<double>(date.iso_week()));
    push("month", static_cast<double>(date.month));
  }
  if (config.include_calendar_flags) {
    push("weekend", date.is_weekend() ? 1.0 : 0.0);
    push("holiday", config.holiday_dates.count(date) ? 1.0 : 0.0);
  }
  if (config.include_cyclic) {
    if (hour >= 0) {
      auto [s, c] = cyclic_pair(static_cast<double>(hour), 24.0);
      push("sin_hour", s);
      push("cos_hour", c);
    }
    auto [sd, cd] = cyclic_pair(static_cast<double>(date.day_of_week()), 7.0);
    push("sin_dow", sd);
    push("cos_dow", cd);
    auto [sm, cm] = cyclic_pair(static_cast<double>(date.month), 12.0);
    push("sin_month", sm);
    push("cos_month", cm);
  }
}

namespace {

// Emits windows over one run of consecutive days. day_count(run) days are
// available; a window of W days plus its target day must fit.
template <typename GetFeatures, typename GetTotal, typename GetDate>
void emit_windows_for_run(size_t run_begin, size_t run_end, int window_days, int stride,
                          const GetFeatures& slot_features, const GetTotal& day_total,
                          const GetDate& day_date, const std::string& user_id,
                          std::vector<Example>* out) {
  const size_t w = static_cast<size_t>(window_days);
  if (run_end - run_begin < w + 1) return;
  for (size_t i = run_begin; i + w < run_end; i += static_cast<size_t>(stride)) {
    Example ex;
    ex.user_id = user_id;
    ex.target_date = day_date(i + w);
    ex.target = day_total(i + w);
    for (size_t d = i; d < i + w; ++d) slot_features(d, &ex.features);
    out->push_back(std::move(ex));
  }
}

template <typename Series>
std::vector<std::pair<size_t, size_t>> consecutive_runs(const Series& days) {
  std::vector<std::pair<size_t, size_t>> runs;
  size_t i = 0;
  while (i < days.size()) {
    size_t j = i + 1;
    while (j < days.size() && days[j].date.to_days() == days[j - 1].date.to_days() + 1) ++j;
    runs.emplace_back(i, j);
    i = j;
  }
  return runs;
}

void sort_chronologically(std::vector<Example>* examples) {
  std::stable_sort(examples->begin(), examples->end(), [](const Example& a, const Example& b) {
    if (a.target_date != b.target_date) return a.target_date < b.target_date;
    return a.user_id < b.user_id;
  });
}

std::vector<std::string> hourly_feature_names(int window_days, const FeatureConfig& fc) {
  std::vector<std::string> names;
  std::vector<double> dummy;
  for (int d = 0; d < window_days; ++d) {
    for (int h = 0; h < 24; ++h) {
      char prefix[32];
      std::snprintf(prefix, sizeof(prefix), "d%d_h%02d_", d, h);
      dummy.clear();
      featurize_slot(0.0, Date{2015, 1, 5}, h, fc, &dummy, &names, prefix);
    }
  }
  return names;
}

std::vector<std::string> daily_feature_names(int window_days, const FeatureConfig& fc) {
  std::vector<std::string> names;
  std::vector<double> dummy;
  for (int d = 0; d < window_days; ++d) {
    char prefix[16];
    std::snprintf(prefix, sizeof(prefix), "d%d_", d);
    dummy.clear();
    featurize_slot(0.0, Date{2015, 1, 5}, -1, fc, &dummy, &names, prefix);
  }
  return names;
}

}  // namespace

WindowedDataset build_windows(const std::vector<HourlyGrid>& grids, const WindowConfig& wc,
                              const FeatureConfig& fc) {
  wc.validate();
  fc.validate();
  WindowedDataset ds;
  ds.meta.granularity = Granularity::hourly;
  ds.meta.window_days = wc.window_days;
  ds.meta.stride_days = wc.effective_stride();
  ds.meta.features = fc;
  ds.meta.slots = 24 * wc.window_days;
  ds.meta.channels = fc.channels(Granularity::hourly);
  ds.feature_names = hourly_feature_names(wc.window_days, fc);

  for (const auto& g : grids) {
    auto slot_features = [&](size_t day_idx, std::vector<double>* out) {
      const DayRow& day = g.days[day_idx];
      for (int h = 0; h < 24; ++h) {
        featurize_slot(static_cast<double>(day.steps[h]), day.date, h, fc, out);
      }
    };
    auto day_total = [&](size_t day_idx) { return static_cast<double>(g.days[day_idx].total()); };
    auto day_date = [&](size_t day_idx) { return g.days[day_idx].date; };
    for (auto [b, e] : consecutive_runs(g.days)) {
      emit_windows_for_run(b, e, wc.window_days, wc.effective_stride(), slot_features, day_total,
                           day_date, g.user_id, &ds.examples);
    }
  }
  sort_chronologically(&ds.examples);
  return ds;
}

WindowedDataset build_windows(const std::vector<DailySeries>& series, const WindowConfig& wc,
                              const FeatureConfig& fc) {
  wc.validate();
  fc.validate();
  WindowedDataset ds;
  ds.meta.granularity = Granularity::daily;
  ds.meta.window_days = wc.window_days;
  ds.meta.stride_days = wc.effective_stride();
  ds.meta.features = fc;
  ds.meta.slots = wc.window_days;
  ds.meta.channels = fc.channels(Granularity::daily);
  ds.feature_names = daily_feature_names(wc.window_days, fc);

  for (const auto& s : series) {
    auto slot_features = [&](size_t day_idx, std::vector<double>* out) {
      featurize_slot(static_cast<double>(s.days[day_idx].total), s.days[day_idx].date, -1, fc, out);
    };
    auto day_total = [&](size_t day_idx) { return static_cast<double>(s.days[day_idx].total); };
    auto day_date = [&](size_t day_idx) { return s.days[day_idx].date; };
    for (auto [b, e] : consecutive_runs(s.days)) {
      emit_windows_for_run(b, e, wc.window_days, wc.effective_stride(), slot_features, day_total,
                           day_date, s.user_id, &ds.examples);
    }
  }
  sort_chronologically(&ds.examples);
  return ds;
}

void SplitRatios::validate() const {
  if (train < 0 || val < 0 || test < 0) throw std::invalid_argument("split ratios must be >= 0");
  if (std::fabs(train + val + test - 1.0) > 1e-9) {
    throw std::invalid_argument("split ratios must sum to 1");
  }
}

DatasetSplits chronological_split(const WindowedDataset& ds, const SplitRatios& ratios) {
  ratios.validate();
  const size_t n = ds.examples.size();
  const size_t n_train = static_cast<size_t>(std::floor(ratios.train * static_cast<double>(n)));
  const size_t n_val = static_cast<size_t>(std::floor(ratios.val * static_cast<double>(n)));

  DatasetSplits out;
  for (WindowedDataset* part : {&out.train, &out.val, &out.test}) {
    part->feature_names = ds.feature_names;
    part->meta = ds.meta;
  }
  out.train.examples.assign(ds.examples.begin(), ds.examples.begin() + n_train);
  out.val.examples.assign(ds.examples.begin() + n_train, ds.examples.begin() + n_train + n_val);
  out.test.examples.assign(ds.examples.begin() + n_train + n_val, ds.examples.end());
  return out;
}

Scaler fit_scaler(const WindowedDataset& train) {
  const size_t n = train.examples.size();
  if (n == 0) throw std::invalid_argument("fit_scaler: empty dataset");
  const size_t d = train.feature_count();

  Scaler s;
  s.feature_mean.assign(d, 0.0);
  s.feature_std.assign(d, 0.0);
  for (const auto& ex : train.examples) {
    for (size_t j = 0; j < d; ++j) s.feature_mean[j] += ex.features[j];
    s.target_mean += ex.target;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  for (size_t j = 0; j < d; ++j) s.feature_mean[j] *= inv_n;
  s.target_mean *= inv_n;

  double target_var = 0.0;
  for (const auto& ex : train.examples) {
    for (size_t j = 0; j < d; ++j) {
      const double c = ex.features[j] - s.feature_mean[j];
      s.feature_std[j] += c * c;
    }
    const double ct = ex.target - s.target_mean;
    target_var += ct * ct;
  }
  for (size_t j = 0; j < d; ++j) {
    double sd = std::sqrt(s.feature_std[j] * inv_n);  // population std
    s.feature_std[j] = sd > 1e-12 ? sd : 1.0;
  }
  double sdt = std::sqrt(target_var * inv_n);
  s.target_std = sdt > 1e-12 ? sdt : 1.0;
  return s;
}

WindowedDataset apply_scaler(const Scaler& s, const WindowedDataset& ds) {
  if (s.feature_mean.size() != ds.feature_count()) {
    throw std::invalid_argument("apply_scaler: feature count mismatch");
  }
  WindowedDataset out = ds;
  for (auto& ex : out.examples) {
    for (size_t j = 0; j < ex.features.size(); ++j) {
      ex.features[j] = (ex.features[j] - s.feature_mean[j]) / s.feature_std[j];
    }
    ex.target = (ex.target - s.target_mean) / s.target_std;
  }
  return out;
}

double invert_target(const Scaler& s, double scaled) {
  return scaled * s.target_std + s.target_mean;
}

std::vector<double> invert_target(const Scaler& s, const std::vector<double>& scaled) {
  std::vector<double> out(scaled.size());
  for (size_t i = 0; i < scaled.size(); ++i) out[i] = invert_target(s, scaled[i]);
  return out;
}

// ----------------------------------------------------------------------
// serialization
// ----------------------------------------------------------------------

std::string scaler_to_json(const Scaler& s) {
  ordered_json j;
  j["feature_mean"] = s.feature_mean;
  j["feature_std"] = s.feature_std;
  j["target_mean"] = s.target_mean;
  j["target_std"] = s.target_std;
  return j.dump();
}

Scaler scaler_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  Scaler s;
  s.feature_mean = j.at("feature_mean").get<std::vector<double>>();
  s.feature_std = j.at("feature_std").get<std::vector<double>>();
  s.target_mean = j.at("target_mean").get<double>();
  s.target_std = j.at("target_std").get<double>();
  return s;
}

std::string dataset_meta_to_json(const DatasetMeta& m) {
  ordered_json j;
  j["granularity"] = to_string(m.granularity);
  j["window_days"] = m.window_days;
  j["stride_days"] = m.stride_days;
  ordered_json f;
  f["include_steps"] = true;
  f["include_date_features"] = m.features.include_date_features;
  f["include_cyclic"] = m.features.include_cyclic;
  f["include_calendar_flags"] = m.features.include_calendar_flags;
  auto& hol = f["holiday_dates"] = ordered_json::array();
  for (const auto& d : m.features.holiday_dates) hol.push_back(d.to_string());
  j["features"] = f;
  j["slots"] = m.slots;
  j["channels"] = m.channels;
  return j.dump();
}

DatasetMeta dataset_meta_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  DatasetMeta m;
  m.granularity = granularity_from_string(j.at("granularity").get<std::string>());
  m.window_days = j.at("window_days").get<int>();
  m.stride_days = j.at("stride_days").get<int>();
  const auto& f = j.at("features");
  m.features.include_date_features = f.at("include_date_features").get<bool>();
  m.features.include_cyclic = f.at("include_cyclic").get<bool>();
  m.features.include_calendar_flags = f.at("include_calendar_flags").get<bool>();
  for (const auto& dj : f.at("holiday_dates")) {
    auto d = Date::parse(dj.get<std::string>());
    if (!d) throw std::runtime_error("invalid holiday date");
    m.features.holiday_dates.insert(*d);
  }
  m.slots = j.at("slots").get<int>();
  m.channels = j.at("channels").get<int>();
  return m;
}

namespace {

constexpr char kMagic[8] = {'S', 'C', 'D', 'S', '0', '0', '0', '1'};

void put_u64(std::ostream& out, uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(b[i]) << (8 * i);
  return v;
}

void put_f64(std::ostream& out, double d) {
  uint64_t bits;
  std::memcpy(&bits, &d, 8);
  put_u64(out, bits);
}

double get_f64(std::istream& in) {
  uint64_t bits = get_u64(in);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

void put_string(std::ostream& out, const std::string& s) {
  put_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  uint64_t n = get_u64(in);
  std::string s(n, '\0');
  in.read(s.data(), static_cast<std::streamsize>(n));
  return s;
}

void put_split(std::ostream& out, const WindowedDataset& ds) {
  put_u64(out, ds.examples.size());
  for (const auto& ex : ds.examples) {
    put_string(out, ex.user_id);
    put_u64(out, static_cast<uint64_t>(static_cast<int64_t>(ex.target_date.to_days())));
    put_f64(out, ex.target);
    for (double f : ex.features) put_f64(out, f);
  }
}

void get_split(std::istream& in, size_t n_features, WindowedDataset* ds) {
  uint64_t n = get_u64(in);
  ds->examples.resize(n);
  for (auto& ex : ds->examples) {
    ex.user_id = get_string(in);
    ex.target_date = Date::from_days(static_cast<int32_t>(static_cast<int64_t>(get_u64(in))));
    ex.target = get_f64(in);
    ex.features.resize(n_features);
    for (auto& f : ex.features) f = get_f64(in);
  }
}

}  // namespace

void save_dataset(const std::string& bin_path, const std::string& sidecar_path,
                  const DatasetBundle& bundle) {
  std::ofstream out(bin_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + bin_path);
  out.write(kMagic, sizeof(kMagic));

  const auto& meta = bundle.splits.train.meta;
  put_string(out, dataset_meta_to_json(meta));
  put_string(out, scaler_to_json(bundle.scaler));
  put_string(out, bundle.pipeline_config_json);
  put_u64(out, bundle.splits.train.feature_names.size());
  for (const auto& name : bundle.splits.train.feature_names) put_string(out, name);
  put_split(out, bundle.splits.train);
  put_split(out, bundle.splits.val);
  put_split(out, bundle.splits.test);
  out.flush();
  if (!out) throw std::runtime_error("I/O error writing " + bin_path);

  if (!sidecar_path.empty()) {
    ordered_json j;
    j["version"] = 1;
    j["meta"] = ordered_json::parse(dataset_meta_to_json(meta));
    j["scaler"] = ordered_json::parse(scaler_to_json(bundle.scaler));
    if (!bundle.pipeline_config_json.empty()) {
      j["pipeline_config"] = ordered_json::parse(bundle.pipeline_config_json);
    }
    j["feature_names"] = bundle.splits.train.feature_names;
    j["counts"] = {{"train", bundle.splits.train.size()},
                   {"val", bundle.splits.val.size()},
                   {"test", bundle.splits.test.size()}};
    std::ofstream side(sidecar_path, std::ios::binary);
    if (!side) throw std::runtime_error("cannot open output file: " + sidecar_path);
    side << j.dump(2) << '\n';
  }
}

DatasetBundle load_dataset(const std::string& bin_path) {
  std::ifstream in(bin_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset file: " + bin_path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, kMagic, 8) != 0) {
    throw std::runtime_error("not a dataset file (bad magic): " + bin_path);
  }
  DatasetBundle b;
  DatasetMeta meta = dataset_meta_from_json(get_string(in));
  b.scaler = scaler_from_json(get_string(in));
  b.pipeline_config_json = get_string(in);
  uint64_t n_names = get_u64(in);
  std::vector<std::string> names(n_names);
  for (auto& n : names) n = get_string(in);

  for (WindowedDataset* part : {&b.splits.train, &b.splits.val, &b.splits.test}) {
    part->meta = meta;
    part->feature_names = names;
    get_split(in, names.size(), part);
  }
  if (!in) throw std::runtime_error("truncated dataset file: " + bin_path);
  return b;
}

}  // namespace stepcast
