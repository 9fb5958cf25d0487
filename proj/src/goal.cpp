#include "stepcast/goal.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "stepcast/pipeline.hpp"

namespace stepcast {

void GoalConfig::validate() const {
  if (uplift < 0.0) throw std::invalid_argument("uplift must be >= 0");
  if (floor_steps && *floor_steps < 0) throw std::invalid_argument("floor must be >= 0");
  if (floor_steps && ceiling_steps && *floor_steps > *ceiling_steps) {
    throw std::invalid_argument("floor must not exceed ceiling");
  }
}

int64_t adaptive_goal(double predicted_steps, const GoalConfig& config) {
  config.validate();
  if (!(predicted_steps >= 0.0)) {
    throw std::invalid_argument("adaptive_goal: predicted_steps must be >= 0");
  }
  int64_t goal = static_cast<int64_t>(std::floor(predicted_steps * (1.0 + config.uplift) + 0.5));
  if (config.floor_steps) goal = std::max(goal, *config.floor_steps);
  if (config.ceiling_steps) goal = std::min(goal, *config.ceiling_steps);
  return goal;
}

InsufficientHistory::InsufficientHistory(int required, int available)
    : std::runtime_error("insufficient history: need " + std::to_string(required) +
                         " consecutive days, have " + std::to_string(available)),
      required_days(required),
      available_days(available) {}

double predict_next_day(const ModelDocument& doc, const std::vector<RawRecord>& history,
                        const std::string& user_id) {
  PipelineConfig pc;
  if (!doc.pipeline_config_json.empty()) {
    pc = PipelineConfig::from_json(doc.pipeline_config_json);
  }
  pc.granularity = doc.dataset_meta.granularity;
  const int w = doc.dataset_meta.window_days;

  // Resolve the user: explicit id, or the single user present.
  std::string uid = user_id;
  if (uid.empty()) {
    std::set<std::string> seen;
    for (const auto& r : history) seen.insert(r.user_id);
    if (seen.size() != 1) {
      throw std::invalid_argument("history holds " + std::to_string(seen.size()) +
                                  " users; pass an explicit user id");
    }
    uid = *seen.begin();
  }
  std::vector<RawRecord> mine;
  for (const auto& r : history) {
    if (r.user_id == uid) mine.push_back(r);
  }

  // Inference cleaning: dedup and resample (plus imputation when the
  // training pipeline used it).
  auto deduped = deduplicate(mine);
  auto grids = resample_hourly(deduped, pc, nullptr);
  if (grids.empty()) throw InsufficientHistory(w, 0);
  HourlyGrid& grid = grids.front();
  if (pc.imputation_enabled) {
    impute_zeros(grid, pc.active_start_hour, pc.active_end_hour, nullptr);
  }

  // Trailing run of consecutive days ending at the most recent day.
  size_t end = grid.days.size();
  size_t begin = end - 1;
  while (begin > 0 &&
         grid.days[begin].date.to_days() == grid.days[begin - 1].date.to_days() + 1) {
    --begin;
  }
  const int available = static_cast<int>(end - begin);
  if (available < w) throw InsufficientHistory(w, available);
  const size_t first = end - static_cast<size_t>(w);

  // Featurize the window exactly as build_windows does.
  const FeatureConfig& fc = doc.dataset_meta.features;
  std::vector<double> features;
  if (doc.dataset_meta.granularity == Granularity::hourly) {
    for (size_t d = first; d < end; ++d) {
      for (int h = 0; h < 24; ++h) {
        featurize_slot(static_cast<double>(grid.days[d].steps[h]), grid.days[d].date, h, fc,
                       &features);
      }
    }
  } else {
    for (size_t d = first; d < end; ++d) {
      featurize_slot(static_cast<double>(grid.days[d].total()), grid.days[d].date, -1, fc,
                     &features);
    }
  }
  if (features.size() != doc.feature_names.size()) {
    throw std::runtime_error("featurized window does not match the model's feature count");
  }

  Matrix X(1, features.size());
  for (size_t j = 0; j < features.size(); ++j) {
    X(0, j) = (features[j] - doc.scaler.feature_mean[j]) / doc.scaler.feature_std[j];
  }
  auto model = instantiate(doc);
  const double scaled = model->predict(X)[0];
  const double raw = invert_target(doc.scaler, scaled);
  return raw < 0.0 ? 0.0 : raw;
}

}  // namespace stepcast
