#include "stepcast/models/ridge.hpp"

#include <stdexcept>

#include "stepcast/kernels.hpp"

namespace stepcast {

void RidgeConfig::validate() const {
  if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
}

double LinearModel::predict_one(const double* x, size_t d) const {
  if (d != weights.size()) throw std::invalid_argument("predict: feature count mismatch");
  return kernels::dot(weights.data(), x, d) + intercept;
}

std::vector<double> LinearModel::predict(const Matrix& X) const {
  std::vector<double> out(X.rows);
  for (size_t i = 0; i < X.rows; ++i) out[i] = predict_one(X.row(i), X.cols);
  return out;
}

LinearModel ridge_fit(const Matrix& X, const std::vector<double>& y, const RidgeConfig& config) {
  config.validate();
  const size_t n = X.rows, d = X.cols;
  if (n == 0 || d == 0) throw std::invalid_argument("ridge_fit: empty problem");
  if (y.size() != n) throw std::invalid_argument("ridge_fit: X/y size mismatch");

  std::vector<double> x_mean(d, 0.0);
  double y_mean = 0.0;
  if (config.fit_intercept) {
    for (size_t i = 0; i < n; ++i) {
      kernels::axpy(1.0, X.row(i), x_mean.data(), d);
      y_mean += y[i];
    }
    for (auto& m : x_mean) m /= static_cast<double>(n);
    y_mean /= static_cast<double>(n);
  }

  // A = Xc' Xc + lambda*I, b = Xc' yc, built by rank-1 row updates.
  Matrix A(d, d);
  std::vector<double> b(d, 0.0);
  std::vector<double> xc(d);
  for (size_t i = 0; i < n; ++i) {
    const double* row = X.row(i);
    for (size_t j = 0; j < d; ++j) xc[j] = row[j] - x_mean[j];
    const double yc = y[i] - y_mean;
    for (size_t j = 0; j < d; ++j) {
      kernels::axpy(xc[j], xc.data(), A.row(j), d);
      b[j] += xc[j] * yc;
    }
  }
  for (size_t j = 0; j < d; ++j) A(j, j) += config.lambda;

  LinearModel model;
  try {
    model.weights = cholesky_solve(std::move(A), std::move(b));
  } catch (const std::runtime_error&) {
    throw std::runtime_error(
        "ridge_fit: singular normal equations; use lambda > 0 to regularize");
  }
  model.intercept = config.fit_intercept
                        ? y_mean - kernels::dot(model.weights.data(), x_mean.data(), d)
                        : 0.0;
  return model;
}

}  // namespace stepcast
