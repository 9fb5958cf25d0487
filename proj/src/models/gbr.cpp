#include "stepcast/models/gbr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "stepcast/kernels.hpp"
#include "stepcast/rng.hpp"

namespace stepcast {

void GBConfig::validate() const {
  if (n_stages < 1) throw std::invalid_argument("n_stages must be >= 1");
  if (!(learning_rate >= 0.0 && learning_rate <= 1.0)) {
    throw std::invalid_argument("learning_rate must lie in [0, 1]");
  }
  if (!(subsample > 0.0 && subsample <= 1.0)) {
    throw std::invalid_argument("subsample must lie in (0, 1]");
  }
  tree.validate();
}

double GBModel::predict_one(const double* x) const {
  double p = init;
  for (const auto& t : stages) p += learning_rate * t.predict_one(x);
  return p;
}

std::vector<double> GBModel::predict(const Matrix& X) const {
  std::vector<double> out(X.rows);
  for (size_t i = 0; i < X.rows; ++i) out[i] = predict_one(X.row(i));
  return out;
}

GBModel gbr_fit(const Matrix& X, const std::vector<double>& y, const GBConfig& config) {
  config.validate();
  const size_t n = X.rows;
  if (n == 0) throw std::invalid_argument("gbr_fit: empty training set");
  if (y.size() != n) throw std::invalid_argument("gbr_fit: X/y size mismatch");

  GBModel model;
  model.learning_rate = config.learning_rate;
  model.init = kernels::sum(y.data(), n) / static_cast<double>(n);

  std::vector<double> current(n, model.init);
  std::vector<double> residual(n);
  std::vector<size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  Rng rng(config.seed);
  const size_t sample_size =
      std::max<size_t>(1, static_cast<size_t>(std::floor(config.subsample * static_cast<double>(n))));

  for (int stage = 0; stage < config.n_stages; ++stage) {
    for (size_t i = 0; i < n; ++i) residual[i] = y[i] - current[i];

    std::vector<size_t> chosen;
    if (sample_size == n) {
      chosen = rows;
    } else {
      // Partial Fisher-Yates; sorted afterwards so the tree sees rows in a
      // stable order.
      std::vector<size_t> pool = rows;
      chosen.reserve(sample_size);
      for (size_t k = 0; k < sample_size; ++k) {
        size_t j = k + static_cast<size_t>(rng.below(pool.size() - k));
        std::swap(pool[k], pool[j]);
        chosen.push_back(pool[k]);
      }
      std::sort(chosen.begin(), chosen.end());
    }

    TreeModel tree = tree_fit_subset(X, residual, chosen, config.tree);
    for (size_t i = 0; i < n; ++i) {
      current[i] += config.learning_rate * tree.predict_one(X.row(i));
    }
    model.stages.push_back(std::move(tree));
    model.train_mse_per_stage.push_back(kernels::sq_err_sum(y.data(), current.data(), n) /
                                        static_cast<double>(n));
  }
  return model;
}

}  // namespace stepcast
