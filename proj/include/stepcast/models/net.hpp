#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stepcast/dataset.hpp"
#include "stepcast/linalg.hpp"
#include "stepcast/rng.hpp"

namespace stepcast {

enum class Arch { mlp, cnn1d, lstm };
enum class PoolKind { none, max, avg };

Arch arch_from_string(const std::string& s);
const char* to_string(Arch a);
PoolKind pool_from_string(const std::string& s);
const char* to_string(PoolKind p);

// Input to the sequence models: `slots` timesteps of `channels` values
// each (24*W x 1 for hourly steps-only data). The MLP consumes the same
// rows flattened.
struct InputShape {
  int slots = 0;
  int channels = 1;
  int flat() const { return slots * channels; }
};

struct NetConfig {
  Arch arch = Arch::mlp;

  // mlp
  std::vector<int> hidden = {256, 128, 64};

  // lstm
  int lstm_layers = 3;
  int lstm_hidden = 64;

  // cnn1d: conv(+relu)(+pool) blocks, then dense relu layers, then head
  std::vector<int> conv_channels = {16};
  int kernel_size = 12;
  int conv_stride = 1;
  PoolKind pool = PoolKind::max;
  int pool_size = 2;
  int pool_stride = 2;
  std::vector<int> dense = {64};

  double dropout = 0.0;  // [0, 1); inverted dropout, training mode only
  uint64_t seed = 0;

  void validate(const InputShape& in) const;  // throws on shape mismatch
};

struct ParamTensor {
  std::string name;
  std::vector<int> shape;
  std::vector<double> v;

  size_t size() const { return v.size(); }
};

struct Net {
  NetConfig config;
  InputShape input;
  std::vector<ParamTensor> params;

  size_t param_count() const {
    size_t n = 0;
    for (const auto& p : params) n += p.size();
    return n;
  }
};

// Deterministic fan-in-scaled uniform initialization, U(-1/sqrt(fan_in),
// +1/sqrt(fan_in)); biases zero except the LSTM forget gate (1.0).
Net net_init(const NetConfig& config, const InputShape& input);

// Evaluation-mode forward (dropout off): a pure function of (net, X).
std::vector<double> net_predict(const Net& net, const Matrix& X);

// Mean-squared-error over the batch and the exact analytic gradient of
// that mean for every parameter. Dropout masks are drawn from rng when
// training is set (rng may be null otherwise).
//
// min_nonlinearity_gap reports how close the batch came to a relu kink or
// a max-pool tie (+inf for smooth architectures). Finite-difference
// oracles are only valid away from those points, so gradient-check
// harnesses redraw configurations whose gap is below their step-size
// safety margin.
struct LossGrad {
  double loss = 0.0;
  std::vector<ParamTensor> grads;  // same order/shapes as net.params
  double min_nonlinearity_gap = 0.0;
};
LossGrad net_loss_grad(const Net& net, const Matrix& X, const std::vector<double>& y,
                       bool training, Rng* rng);

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 128;
  int max_epochs = 100;
  int patience = 10;  // epochs without validation-MAE improvement
  uint64_t seed = 0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
};

struct TrainLog {
  std::vector<double> train_loss;  // scaled-space MSE per epoch
  std::vector<double> val_mae;     // raw steps per epoch
  int best_epoch = -1;             // epoch with minimum validation MAE
};

struct NetFitResult {
  Net net;  // parameters from the best epoch
  TrainLog log;
};

// Mini-batch Adam in chronological batch order (no shuffling), early
// stopping on validation MAE in raw step units. Deterministic given the
// seeds. Throws on divergence (non-finite loss).
NetFitResult net_fit(const NetConfig& config, const TrainConfig& train_config,
                     const WindowedDataset& train_scaled, const WindowedDataset& val_scaled,
                     const Scaler& scaler);

// Shared dataset plumbing.
Matrix feature_matrix(const WindowedDataset& ds);
std::vector<double> target_vector(const WindowedDataset& ds);

// Per-architecture entry points (implementation detail, exposed for tests).
namespace netimpl {
std::vector<double> mlp_predict(const Net&, const Matrix&);
std::vector<double> cnn_predict(const Net&, const Matrix&);
std::vector<double> lstm_predict(const Net&, const Matrix&);
double mlp_loss_grad(const Net&, const Matrix&, const std::vector<double>&, bool, Rng*,
                     std::vector<ParamTensor>*, double* min_gap);
double cnn_loss_grad(const Net&, const Matrix&, const std::vector<double>&, bool, Rng*,
                     std::vector<ParamTensor>*, double* min_gap);
double lstm_loss_grad(const Net&, const Matrix&, const std::vector<double>&, bool, Rng*,
                      std::vector<ParamTensor>*, double* min_gap);

// Conv output length bookkeeping shared by validate/forward.
int conv_out_len(int in_len, int kernel, int stride);
int pool_out_len(int in_len, const NetConfig&);

std::vector<ParamTensor> zero_like(const std::vector<ParamTensor>& params);
}  // namespace netimpl

}  // namespace stepcast
