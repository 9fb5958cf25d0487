#pragma once

#include <vector>

#include "stepcast/linalg.hpp"

namespace stepcast {

struct RidgeConfig {
  double lambda = 1.0;  // >= 0
  bool fit_intercept = true;

  void validate() const;
};

struct LinearModel {
  std::vector<double> weights;
  double intercept = 0.0;

  double predict_one(const double* x, size_t d) const;
  std::vector<double> predict(const Matrix& X) const;
};

// Penalized least squares via the normal equations; the intercept is left
// unpenalized by centering X and y first. With lambda = 0 a singular
// system raises an error pointing at lambda > 0.
LinearModel ridge_fit(const Matrix& X, const std::vector<double>& y, const RidgeConfig& config);

}  // namespace stepcast
