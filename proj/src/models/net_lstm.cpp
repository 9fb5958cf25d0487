#include <cmath>
#include <vector>

#include "stepcast/kernels.hpp"
#include "stepcast/models/net.hpp"

namespace stepcast::netimpl {

namespace {

// Parameter layout per layer l: [Wx (4H x In), Wh (4H x H), b (4H)], head
// W/b last. Gate rows within the 4H block: [input; forget; candidate;
// output]; logistic gates, tanh candidate.

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct LayerCache {
  // Per timestep: gate activations and states, each H wide.
  std::vector<double> i, f, g, o;   // T*H
  std::vector<double> c, tanh_c, h; // T*H
  std::vector<double> input;        // T*In (post inter-layer dropout)
  std::vector<double> mask;         // dropout mask on this layer's input (empty = none)
  int in_dim = 0;
};

struct SampleCache {
  std::vector<LayerCache> layers;
};

double forward_one(const Net& net, const double* x, bool training, Rng* rng, SampleCache* cache) {
  const NetConfig& cfg = net.config;
  const int H = cfg.lstm_hidden;
  const int T = net.input.slots;
  const int n_layers = cfg.lstm_layers;
  const double p = cfg.dropout;
  cache->layers.assign(static_cast<size_t>(n_layers), {});

  std::vector<double> z(static_cast<size_t>(4 * H));
  std::vector<double> layer_in;  // T * in_dim
  int in_dim = net.input.channels;
  layer_in.assign(x, x + static_cast<size_t>(T) * in_dim);

  for (int l = 0; l < n_layers; ++l) {
    LayerCache& lc = cache->layers[static_cast<size_t>(l)];
    lc.in_dim = in_dim;

    // Inter-layer inverted dropout on the incoming sequence (not on the
    // raw input features).
    if (l > 0 && training && p > 0.0) {
      lc.mask.resize(layer_in.size());
      const double keep = 1.0 - p;
      for (auto& mv : lc.mask) mv = rng->uniform() < keep ? 1.0 / keep : 0.0;
      kernels::hadamard(layer_in.data(), lc.mask.data(), layer_in.data(), layer_in.size());
    }
    lc.input = layer_in;

    const ParamTensor& Wx = net.params[static_cast<size_t>(3 * l)];
    const ParamTensor& Wh = net.params[static_cast<size_t>(3 * l + 1)];
    const ParamTensor& b = net.params[static_cast<size_t>(3 * l + 2)];

    const size_t th = static_cast<size_t>(T) * H;
    lc.i.assign(th, 0.0);
    lc.f.assign(th, 0.0);
    lc.g.assign(th, 0.0);
    lc.o.assign(th, 0.0);
    lc.c.assign(th, 0.0);
    lc.tanh_c.assign(th, 0.0);
    lc.h.assign(th, 0.0);

    std::vector<double> h_prev(static_cast<size_t>(H), 0.0);
    std::vector<double> c_prev(static_cast<size_t>(H), 0.0);
    for (int t = 0; t < T; ++t) {
      const double* xt = lc.input.data() + static_cast<size_t>(t) * in_dim;
      for (int r = 0; r < 4 * H; ++r) {
        z[static_cast<size_t>(r)] =
            kernels::dot(Wx.v.data() + static_cast<size_t>(r) * in_dim, xt,
                         static_cast<size_t>(in_dim)) +
            kernels::dot(Wh.v.data() + static_cast<size_t>(r) * H, h_prev.data(),
                         static_cast<size_t>(H)) +
            b.v[static_cast<size_t>(r)];
      }
      const size_t base = static_cast<size_t>(t) * H;
      for (int j = 0; j < H; ++j) {
        const double iv = sigmoid(z[static_cast<size_t>(j)]);
        const double fv = sigmoid(z[static_cast<size_t>(H + j)]);
        const double gv = std::tanh(z[static_cast<size_t>(2 * H + j)]);
        const double ov = sigmoid(z[static_cast<size_t>(3 * H + j)]);
        const double cv = fv * c_prev[static_cast<size_t>(j)] + iv * gv;
        const double tc = std::tanh(cv);
        lc.i[base + j] = iv;
        lc.f[base + j] = fv;
        lc.g[base + j] = gv;
        lc.o[base + j] = ov;
        lc.c[base + j] = cv;
        lc.tanh_c[base + j] = tc;
        lc.h[base + j] = ov * tc;
      }
      std::copy(lc.h.begin() + static_cast<long>(base), lc.h.begin() + static_cast<long>(base + H),
                h_prev.begin());
      std::copy(lc.c.begin() + static_cast<long>(base), lc.c.begin() + static_cast<long>(base + H),
                c_prev.begin());
    }

    layer_in.assign(lc.h.begin(), lc.h.end());
    in_dim = H;
  }

  const ParamTensor& Whead = net.params[static_cast<size_t>(3 * n_layers)];
  const ParamTensor& bhead = net.params[static_cast<size_t>(3 * n_layers + 1)];
  const double* h_last =
      cache->layers.back().h.data() + static_cast<size_t>(T - 1) * H;
  return kernels::dot(Whead.v.data(), h_last, static_cast<size_t>(H)) + bhead.v[0];
}

void backward_one(const Net& net, const SampleCache& cache, double gscale,
                  std::vector<ParamTensor>* grads) {
  const NetConfig& cfg = net.config;
  const int H = cfg.lstm_hidden;
  const int T = net.input.slots;
  const int n_layers = cfg.lstm_layers;

  const size_t head_idx = static_cast<size_t>(3 * n_layers);
  const ParamTensor& Whead = net.params[head_idx];
  const double* h_last = cache.layers.back().h.data() + static_cast<size_t>(T - 1) * H;
  kernels::axpy(gscale, h_last, (*grads)[head_idx].v.data(), static_cast<size_t>(H));
  (*grads)[head_idx + 1].v[0] += gscale;

  // d h sequence flowing into the current layer from above.
  std::vector<double> dh_seq(static_cast<size_t>(T) * H, 0.0);
  for (int j = 0; j < H; ++j) {
    dh_seq[static_cast<size_t>(T - 1) * H + j] = gscale * Whead.v[static_cast<size_t>(j)];
  }

  std::vector<double> dz(static_cast<size_t>(4 * H));
  for (int l = n_layers - 1; l >= 0; --l) {
    const LayerCache& lc = cache.layers[static_cast<size_t>(l)];
    const int in_dim = lc.in_dim;
    const ParamTensor& Wx = net.params[static_cast<size_t>(3 * l)];
    const ParamTensor& Wh = net.params[static_cast<size_t>(3 * l + 1)];
    auto& gWx = (*grads)[static_cast<size_t>(3 * l)].v;
    auto& gWh = (*grads)[static_cast<size_t>(3 * l + 1)].v;
    auto& gb = (*grads)[static_cast<size_t>(3 * l + 2)].v;

    std::vector<double> dx_seq(static_cast<size_t>(T) * in_dim, 0.0);
    std::vector<double> dh_rec(static_cast<size_t>(H), 0.0);
    std::vector<double> dc_next(static_cast<size_t>(H), 0.0);

    for (int t = T - 1; t >= 0; --t) {
      const size_t base = static_cast<size_t>(t) * H;
      for (int j = 0; j < H; ++j) {
        const double dh = dh_seq[base + j] + dh_rec[static_cast<size_t>(j)];
        const double iv = lc.i[base + j], fv = lc.f[base + j];
        const double gv = lc.g[base + j], ov = lc.o[base + j];
        const double tc = lc.tanh_c[base + j];
        const double c_prev =
            t > 0 ? lc.c[base - static_cast<size_t>(H) + j] : 0.0;

        const double dc = dh * ov * (1.0 - tc * tc) + dc_next[static_cast<size_t>(j)];
        const double do_ = dh * tc;
        const double di = dc * gv;
        const double dg = dc * iv;
        const double df = dc * c_prev;
        dc_next[static_cast<size_t>(j)] = dc * fv;

        dz[static_cast<size_t>(j)] = di * iv * (1.0 - iv);
        dz[static_cast<size_t>(H + j)] = df * fv * (1.0 - fv);
        dz[static_cast<size_t>(2 * H + j)] = dg * (1.0 - gv * gv);
        dz[static_cast<size_t>(3 * H + j)] = do_ * ov * (1.0 - ov);
      }

      const double* xt = lc.input.data() + static_cast<size_t>(t) * in_dim;
      const double* h_prev = t > 0 ? lc.h.data() + (base - static_cast<size_t>(H)) : nullptr;
      double* dxt = dx_seq.data() + static_cast<size_t>(t) * in_dim;
      std::fill(dh_rec.begin(), dh_rec.end(), 0.0);
      for (int r = 0; r < 4 * H; ++r) {
        const double grad = dz[static_cast<size_t>(r)];
        if (grad == 0.0) continue;
        kernels::axpy(grad, xt, gWx.data() + static_cast<size_t>(r) * in_dim,
                      static_cast<size_t>(in_dim));
        if (h_prev != nullptr) {
          kernels::axpy(grad, h_prev, gWh.data() + static_cast<size_t>(r) * H,
                        static_cast<size_t>(H));
        }
        gb[static_cast<size_t>(r)] += grad;
        kernels::axpy(grad, Wx.v.data() + static_cast<size_t>(r) * in_dim, dxt,
                      static_cast<size_t>(in_dim));
        kernels::axpy(grad, Wh.v.data() + static_cast<size_t>(r) * H, dh_rec.data(),
                      static_cast<size_t>(H));
      }
    }

    if (!lc.mask.empty()) {
      kernels::hadamard(dx_seq.data(), lc.mask.data(), dx_seq.data(), dx_seq.size());
    }
    dh_seq = std::move(dx_seq);  // becomes the layer below's output grads
  }
}

}  // namespace

std::vector<double> lstm_predict(const Net& net, const Matrix& X) {
  std::vector<double> out(X.rows);
  SampleCache cache;
  for (size_t i = 0; i < X.rows; ++i) {
    out[i] = forward_one(net, X.row(i), false, nullptr, &cache);
  }
  return out;
}

double lstm_loss_grad(const Net& net, const Matrix& X, const std::vector<double>& y, bool training,
                      Rng* rng, std::vector<ParamTensor>* grads, double* min_gap) {
  // Sigmoid/tanh gates are smooth everywhere, so min_gap stays infinite.
  (void)min_gap;
  const double inv_b = 1.0 / static_cast<double>(X.rows);
  double loss = 0.0;
  SampleCache cache;
  for (size_t i = 0; i < X.rows; ++i) {
    const double pred = forward_one(net, X.row(i), training, rng, &cache);
    const double r = pred - y[i];
    loss += r * r * inv_b;
    backward_one(net, cache, 2.0 * r * inv_b, grads);
  }
  return loss;
}

}  // namespace stepcast::netimpl
