#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stepcast/models/model_io.hpp"
#include "stepcast/records.hpp"

namespace stepcast {

struct GoalConfig {
  double uplift = 0.10;  // >= 0
  std::optional<int64_t> floor_steps;
  std::optional<int64_t> ceiling_steps;

  void validate() const;
};

// goal = round-half-up(predicted * (1 + uplift)), clamped to the optional
// [floor, ceiling] band. Monotone in predicted_steps for a fixed config.
int64_t adaptive_goal(double predicted_steps, const GoalConfig& config);

struct InsufficientHistory : std::runtime_error {
  int required_days;
  int available_days;
  InsufficientHistory(int required, int available);
};

// Cleans one user's recent records with the model's embedded configs,
// takes the W most recent consecutive days, and returns the inverse-scaled
// prediction (negative outputs clamped to 0). Corpus-curation stages
// (study-period filter, population outlier cut, user filter) do not apply
// to single-user inference.
double predict_next_day(const ModelDocument& doc, const std::vector<RawRecord>& history,
                        const std::string& user_id = {});

}  // namespace stepcast
