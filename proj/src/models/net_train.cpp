#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "stepcast/kernels.hpp"
#include "stepcast/models/net.hpp"

namespace stepcast {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  if (max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
  if (patience < 0) throw std::invalid_argument("patience must be >= 0");
}

namespace {

struct AdamState {
  std::vector<std::vector<double>> m, v;
  int64_t t = 0;

  explicit AdamState(const std::vector<ParamTensor>& params) {
    for (const auto& p : params) {
      m.emplace_back(p.size(), 0.0);
      v.emplace_back(p.size(), 0.0);
    }
  }

  void step(const TrainConfig& tc, const std::vector<ParamTensor>& grads,
            std::vector<ParamTensor>* params) {
    ++t;
    const double bc1 = 1.0 - std::pow(tc.adam_beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(tc.adam_beta2, static_cast<double>(t));
    for (size_t p = 0; p < params->size(); ++p) {
      auto& pv = (*params)[p].v;
      const auto& g = grads[p].v;
      for (size_t i = 0; i < pv.size(); ++i) {
        m[p][i] = tc.adam_beta1 * m[p][i] + (1.0 - tc.adam_beta1) * g[i];
        v[p][i] = tc.adam_beta2 * v[p][i] + (1.0 - tc.adam_beta2) * g[i] * g[i];
        const double mhat = m[p][i] / bc1;
        const double vhat = v[p][i] / bc2;
        pv[i] -= tc.learning_rate * mhat / (std::sqrt(vhat) + tc.adam_eps);
      }
    }
  }
};

Matrix slice_rows(const Matrix& X, size_t begin, size_t end) {
  Matrix out(end - begin, X.cols);
  std::copy(X.a.begin() + static_cast<long>(begin * X.cols),
            X.a.begin() + static_cast<long>(end * X.cols), out.a.begin());
  return out;
}

}  // namespace

NetFitResult net_fit(const NetConfig& config, const TrainConfig& train_config,
                     const WindowedDataset& train_scaled, const WindowedDataset& val_scaled,
                     const Scaler& scaler) {
  train_config.validate();
  if (train_scaled.examples.empty()) throw std::invalid_argument("net_fit: empty training set");
  if (val_scaled.examples.empty()) {
    throw std::invalid_argument("net_fit: early stopping needs a nonempty validation set");
  }

  InputShape shape{train_scaled.meta.slots, train_scaled.meta.channels};
  if (static_cast<size_t>(shape.flat()) != train_scaled.feature_count()) {
    throw std::invalid_argument("net_fit: dataset meta does not match feature count");
  }

  Net net = net_init(config, shape);
  const Matrix X = feature_matrix(train_scaled);
  const std::vector<double> y = target_vector(train_scaled);
  const Matrix Xval = feature_matrix(val_scaled);
  std::vector<double> yval_raw = target_vector(val_scaled);
  for (auto& t : yval_raw) t = invert_target(scaler, t);

  const size_t n = X.rows;
  const size_t bs = static_cast<size_t>(train_config.batch_size);
  AdamState adam(net.params);
  Rng dropout_rng(mix_seed(train_config.seed, 0x647270ULL));

  NetFitResult result;
  TrainLog& log = result.log;
  std::vector<ParamTensor> best_params = net.params;
  double best_mae = std::numeric_limits<double>::infinity();
  int wait = 0;

  for (int epoch = 0; epoch < train_config.max_epochs; ++epoch) {
    double sse = 0.0;  // scaled-space squared error over the epoch
    for (size_t b = 0; b < n; b += bs) {
      const size_t e = std::min(n, b + bs);
      Matrix Xb = slice_rows(X, b, e);
      std::vector<double> yb(y.begin() + static_cast<long>(b), y.begin() + static_cast<long>(e));
      LossGrad lg = net_loss_grad(net, Xb, yb, true, &dropout_rng);
      if (!std::isfinite(lg.loss)) {
        throw std::runtime_error("net_fit: training diverged (non-finite loss) at epoch " +
                                 std::to_string(epoch));
      }
      sse += lg.loss * static_cast<double>(e - b);
      adam.step(train_config, lg.grads, &net.params);
    }
    log.train_loss.push_back(sse / static_cast<double>(n));

    std::vector<double> val_pred = net_predict(net, Xval);
    for (auto& p : val_pred) p = invert_target(scaler, p);
    const double val_mae =
        kernels::abs_err_sum(val_pred.data(), yval_raw.data(), val_pred.size()) /
        static_cast<double>(val_pred.size());
    log.val_mae.push_back(val_mae);

    if (val_mae < best_mae) {
      best_mae = val_mae;
      log.best_epoch = epoch;
      best_params = net.params;
      wait = 0;
    } else {
      ++wait;
      if (wait > train_config.patience) break;
    }
  }

  net.params = std::move(best_params);
  result.net = std::move(net);
  return result;
}

}  // namespace stepcast
