#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "stepcast/models/net.hpp"

namespace stepcast {

Arch arch_from_string(const std::string& s) {
  if (s == "mlp") return Arch::mlp;
  if (s == "cnn" || s == "cnn1d") return Arch::cnn1d;
  if (s == "lstm" || s == "rnn") return Arch::lstm;
  throw std::invalid_argument("unknown architecture: " + s);
}

const char* to_string(Arch a) {
  switch (a) {
    case Arch::mlp: return "mlp";
    case Arch::cnn1d: return "cnn1d";
    case Arch::lstm: return "lstm";
  }
  return "?";
}

PoolKind pool_from_string(const std::string& s) {
  if (s == "none") return PoolKind::none;
  if (s == "max") return PoolKind::max;
  if (s == "avg") return PoolKind::avg;
  throw std::invalid_argument("unknown pool kind: " + s);
}

const char* to_string(PoolKind p) {
  switch (p) {
    case PoolKind::none: return "none";
    case PoolKind::max: return "max";
    case PoolKind::avg: return "avg";
  }
  return "?";
}

namespace netimpl {

int conv_out_len(int in_len, int kernel, int stride) {
  if (in_len < kernel) return 0;
  return (in_len - kernel) / stride + 1;
}

int pool_out_len(int in_len, const NetConfig& c) {
  if (c.pool == PoolKind::none) return in_len;
  if (in_len < c.pool_size) return 0;
  return (in_len - c.pool_size) / c.pool_stride + 1;
}

std::vector<ParamTensor> zero_like(const std::vector<ParamTensor>& params) {
  std::vector<ParamTensor> out;
  out.reserve(params.size());
  for (const auto& p : params) {
    out.push_back(ParamTensor{p.name, p.shape, std::vector<double>(p.v.size(), 0.0)});
  }
  return out;
}

}  // namespace netimpl

void NetConfig::validate(const InputShape& in) const {
  if (in.slots < 1 || in.channels < 1) throw std::invalid_argument("empty input shape");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must lie in [0,1)");
  switch (arch) {
    case Arch::mlp:
      if (hidden.empty()) throw std::invalid_argument("mlp needs at least one hidden layer");
      for (int h : hidden) {
        if (h < 1) throw std::invalid_argument("mlp hidden widths must be >= 1");
      }
      break;
    case Arch::lstm:
      if (lstm_layers < 1 || lstm_hidden < 1) {
        throw std::invalid_argument("lstm needs >= 1 layer and hidden size >= 1");
      }
      break;
    case Arch::cnn1d: {
      if (conv_channels.empty()) throw std::invalid_argument("cnn needs >= 1 conv layer");
      if (kernel_size < 1 || conv_stride < 1) {
        throw std::invalid_argument("kernel_size and conv_stride must be >= 1");
      }
      if (pool != PoolKind::none && (pool_size < 1 || pool_stride < 1)) {
        throw std::invalid_argument("pool_size and pool_stride must be >= 1");
      }
      int len = in.slots;
      for (size_t i = 0; i < conv_channels.size(); ++i) {
        if (conv_channels[i] < 1) throw std::invalid_argument("conv channel counts must be >= 1");
        len = netimpl::conv_out_len(len, kernel_size, conv_stride);
        if (len < 1) throw std::invalid_argument("input sequence too short for conv stack");
        len = netimpl::pool_out_len(len, *this);
        if (len < 1) throw std::invalid_argument("input sequence too short for pooling");
      }
      for (int h : dense) {
        if (h < 1) throw std::invalid_argument("dense widths must be >= 1");
      }
      break;
    }
  }
}

namespace {

void init_uniform(ParamTensor* t, double limit, Rng* rng) {
  for (auto& x : t->v) x = rng->uniform(-limit, limit);
}

ParamTensor make_tensor(const std::string& name, std::vector<int> shape) {
  size_t n = 1;
  for (int d : shape) n *= static_cast<size_t>(d);
  return ParamTensor{name, std::move(shape), std::vector<double>(n, 0.0)};
}

}  // namespace

Net net_init(const NetConfig& config, const InputShape& input) {
  config.validate(input);
  Net net;
  net.config = config;
  net.input = input;
  Rng rng(config.seed);

  auto add_dense = [&](const std::string& name, int out, int in) {
    ParamTensor w = make_tensor(name + "_w", {out, in});
    init_uniform(&w, 1.0 / std::sqrt(static_cast<double>(in)), &rng);
    net.params.push_back(std::move(w));
    net.params.push_back(make_tensor(name + "_b", {out}));
  };

  switch (config.arch) {
    case Arch::mlp: {
      int in = input.flat();
      for (size_t l = 0; l < config.hidden.size(); ++l) {
        add_dense("fc" + std::to_string(l), config.hidden[l], in);
        in = config.hidden[l];
      }
      add_dense("head", 1, in);
      break;
    }
    case Arch::cnn1d: {
      int in_ch = input.channels;
      int len = input.slots;
      for (size_t c = 0; c < config.conv_channels.size(); ++c) {
        int out_ch = config.conv_channels[c];
        ParamTensor k = make_tensor("conv" + std::to_string(c) + "_k",
                                    {out_ch, in_ch, config.kernel_size});
        init_uniform(&k, 1.0 / std::sqrt(static_cast<double>(in_ch * config.kernel_size)), &rng);
        net.params.push_back(std::move(k));
        net.params.push_back(make_tensor("conv" + std::to_string(c) + "_b", {out_ch}));
        len = netimpl::conv_out_len(len, config.kernel_size, config.conv_stride);
        len = netimpl::pool_out_len(len, config);
        in_ch = out_ch;
      }
      int in = in_ch * len;
      for (size_t l = 0; l < config.dense.size(); ++l) {
        add_dense("fc" + std::to_string(l), config.dense[l], in);
        in = config.dense[l];
      }
      add_dense("head", 1, in);
      break;
    }
    case Arch::lstm: {
      int in = input.channels;
      const int H = config.lstm_hidden;
      for (int l = 0; l < config.lstm_layers; ++l) {
        const double limit = 1.0 / std::sqrt(static_cast<double>(in + H));
        ParamTensor wx = make_tensor("lstm" + std::to_string(l) + "_wx", {4 * H, in});
        ParamTensor wh = make_tensor("lstm" + std::to_string(l) + "_wh", {4 * H, H});
        init_uniform(&wx, limit, &rng);
        init_uniform(&wh, limit, &rng);
        net.params.push_back(std::move(wx));
        net.params.push_back(std::move(wh));
        ParamTensor b = make_tensor("lstm" + std::to_string(l) + "_b", {4 * H});
        // Gate rows are [input; forget; candidate; output]; the forget
        // gate starts open.
        for (int i = H; i < 2 * H; ++i) b.v[static_cast<size_t>(i)] = 1.0;
        net.params.push_back(std::move(b));
        in = H;
      }
      add_dense("head", 1, H);
      break;
    }
  }
  return net;
}

std::vector<double> net_predict(const Net& net, const Matrix& X) {
  switch (net.config.arch) {
    case Arch::mlp: return netimpl::mlp_predict(net, X);
    case Arch::cnn1d: return netimpl::cnn_predict(net, X);
    case Arch::lstm: return netimpl::lstm_predict(net, X);
  }
  throw std::logic_error("unreachable");
}

LossGrad net_loss_grad(const Net& net, const Matrix& X, const std::vector<double>& y,
                       bool training, Rng* rng) {
  if (X.rows != y.size() || X.rows == 0) throw std::invalid_argument("net_loss_grad: batch mismatch");
  if (training && net.config.dropout > 0.0 && rng == nullptr) {
    throw std::invalid_argument("net_loss_grad: dropout needs an rng in training mode");
  }
  LossGrad out;
  out.grads = netimpl::zero_like(net.params);
  out.min_nonlinearity_gap = std::numeric_limits<double>::infinity();
  switch (net.config.arch) {
    case Arch::mlp:
      out.loss = netimpl::mlp_loss_grad(net, X, y, training, rng, &out.grads,
                                        &out.min_nonlinearity_gap);
      break;
    case Arch::cnn1d:
      out.loss = netimpl::cnn_loss_grad(net, X, y, training, rng, &out.grads,
                                        &out.min_nonlinearity_gap);
      break;
    case Arch::lstm:
      out.loss = netimpl::lstm_loss_grad(net, X, y, training, rng, &out.grads,
                                         &out.min_nonlinearity_gap);
      break;
  }
  return out;
}

Matrix feature_matrix(const WindowedDataset& ds) {
  Matrix X(ds.examples.size(), ds.feature_count());
  for (size_t i = 0; i < ds.examples.size(); ++i) {
    const auto& f = ds.examples[i].features;
    std::copy(f.begin(), f.end(), X.row(i));
  }
  return X;
}

std::vector<double> target_vector(const WindowedDataset& ds) {
  std::vector<double> y(ds.examples.size());
  for (size_t i = 0; i < ds.examples.size(); ++i) y[i] = ds.examples[i].target;
  return y;
}

}  // namespace stepcast
