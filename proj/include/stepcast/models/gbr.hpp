#pragma once

#include <cstdint>
#include <vector>

#include "stepcast/models/tree.hpp"

namespace stepcast {

struct GBConfig {
  int n_stages = 300;
  double learning_rate = 0.1;  // (0, 1]
  double subsample = 1.0;      // (0, 1]; stochastic row subsampling per stage
  TreeConfig tree{3, 2, 1};    // shallow base learners
  uint64_t seed = 0;

  void validate() const;
};

struct GBModel {
  double init = 0.0;  // mean of the training targets
  double learning_rate = 0.1;
  std::vector<TreeModel> stages;
  std::vector<double> train_mse_per_stage;  // after each stage

  double predict_one(const double* x) const;
  std::vector<double> predict(const Matrix& X) const;
};

// Stage-wise least-squares boosting: each stage fits a tree to the current
// residuals on a (seeded, deterministic) row subsample and contributes
// learning_rate times its prediction.
GBModel gbr_fit(const Matrix& X, const std::vector<double>& y, const GBConfig& config);

}  // namespace stepcast
