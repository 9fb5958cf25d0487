#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "stepcast/kernels.hpp"
#include "stepcast/models/net.hpp"

namespace stepcast::netimpl {

namespace {

// Parameter layout: [K0, b0, K1, b1, ...] for the conv blocks, then dense
// W/b pairs, then the head pair. All sequence planes are channel-major:
// plane[ch * len + t].

struct ConvBlockCache {
  std::vector<double> input;    // channel-major input to the block
  int in_ch = 0, in_len = 0;
  std::vector<double> pre;      // conv output, pre relu
  std::vector<double> act;      // post relu
  int conv_len = 0;
  std::vector<double> pooled;   // post pool (== act when pool none)
  int pool_len = 0;
  std::vector<int> argmax;      // max-pool source index per output cell
};

struct SampleCache {
  std::vector<ConvBlockCache> blocks;
  std::vector<std::vector<double>> dense_pre;
  std::vector<std::vector<double>> dense_act;
  std::vector<std::vector<double>> dense_mask;
  double min_gap = std::numeric_limits<double>::infinity();  // relu kink / pool tie distance
};

double forward_one(const Net& net, const double* x, bool training, Rng* rng, SampleCache* cache) {
  const NetConfig& c = net.config;
  const int k = c.kernel_size, s = c.conv_stride;
  const size_t n_conv = c.conv_channels.size();
  cache->blocks.assign(n_conv, {});

  // Slot-major row -> channel-major plane.
  int in_ch = net.input.channels;
  int in_len = net.input.slots;
  std::vector<double> plane(static_cast<size_t>(in_ch) * in_len);
  for (int ch = 0; ch < in_ch; ++ch) {
    for (int t = 0; t < in_len; ++t) {
      plane[static_cast<size_t>(ch) * in_len + t] = x[static_cast<size_t>(t) * in_ch + ch];
    }
  }

  for (size_t blk = 0; blk < n_conv; ++blk) {
    ConvBlockCache& bc = cache->blocks[blk];
    bc.input = std::move(plane);
    bc.in_ch = in_ch;
    bc.in_len = in_len;

    const ParamTensor& K = net.params[2 * blk];
    const ParamTensor& b = net.params[2 * blk + 1];
    const int out_ch = K.shape[0];
    bc.conv_len = conv_out_len(in_len, k, s);
    bc.pre.assign(static_cast<size_t>(out_ch) * bc.conv_len, 0.0);
    for (int oc = 0; oc < out_ch; ++oc) {
      double* out_plane = bc.pre.data() + static_cast<size_t>(oc) * bc.conv_len;
      for (int t = 0; t < bc.conv_len; ++t) {
        double acc = b.v[static_cast<size_t>(oc)];
        for (int ic = 0; ic < in_ch; ++ic) {
          const double* kern = K.v.data() + (static_cast<size_t>(oc) * in_ch + ic) * k;
          const double* src = bc.input.data() + static_cast<size_t>(ic) * in_len + t * s;
          acc += kernels::dot(kern, src, static_cast<size_t>(k));
        }
        out_plane[t] = acc;
      }
    }
    for (double zv : bc.pre) cache->min_gap = std::min(cache->min_gap, std::fabs(zv));
    bc.act.resize(bc.pre.size());
    kernels::relu(bc.pre.data(), bc.act.data(), bc.pre.size());

    bc.pool_len = pool_out_len(bc.conv_len, c);
    if (c.pool == PoolKind::none) {
      bc.pooled = bc.act;
    } else {
      bc.pooled.assign(static_cast<size_t>(out_ch) * bc.pool_len, 0.0);
      if (c.pool == PoolKind::max) bc.argmax.assign(bc.pooled.size(), 0);
      for (int oc = 0; oc < out_ch; ++oc) {
        const double* src = bc.act.data() + static_cast<size_t>(oc) * bc.conv_len;
        for (int t = 0; t < bc.pool_len; ++t) {
          const int from = t * c.pool_stride;
          if (c.pool == PoolKind::max) {
            int best = from;
            for (int j = 1; j < c.pool_size; ++j) {
              if (src[from + j] > src[best]) best = from + j;
            }
            for (int j = 0; j < c.pool_size; ++j) {
              if (from + j != best) {
                cache->min_gap = std::min(cache->min_gap, src[best] - src[from + j]);
              }
            }
            bc.pooled[static_cast<size_t>(oc) * bc.pool_len + t] = src[best];
            bc.argmax[static_cast<size_t>(oc) * bc.pool_len + t] = best;
          } else {
            double acc = 0.0;
            for (int j = 0; j < c.pool_size; ++j) acc += src[from + j];
            bc.pooled[static_cast<size_t>(oc) * bc.pool_len + t] =
                acc / static_cast<double>(c.pool_size);
          }
        }
      }
    }
    plane = bc.pooled;
    in_ch = out_ch;
    in_len = bc.pool_len;
  }

  // Dense stack on the flattened plane.
  const size_t n_dense = c.dense.size();
  const double p = c.dropout;
  const bool use_dropout = training && p > 0.0;
  cache->dense_pre.resize(n_dense);
  cache->dense_act.resize(n_dense);
  cache->dense_mask.assign(n_dense, {});

  const double* in = plane.data();
  size_t in_dim = plane.size();
  for (size_t l = 0; l < n_dense; ++l) {
    const ParamTensor& W = net.params[2 * n_conv + 2 * l];
    const ParamTensor& bb = net.params[2 * n_conv + 2 * l + 1];
    auto& z = cache->dense_pre[l];
    z.resize(static_cast<size_t>(W.shape[0]));
    for (size_t o = 0; o < z.size(); ++o) {
      z[o] = kernels::dot(W.v.data() + o * in_dim, in, in_dim) + bb.v[o];
    }
    for (double zv : z) cache->min_gap = std::min(cache->min_gap, std::fabs(zv));
    auto& a = cache->dense_act[l];
    a.resize(z.size());
    kernels::relu(z.data(), a.data(), z.size());
    if (use_dropout) {
      auto& m = cache->dense_mask[l];
      m.resize(a.size());
      const double keep = 1.0 - p;
      for (auto& mv : m) mv = rng->uniform() < keep ? 1.0 / keep : 0.0;
      kernels::hadamard(a.data(), m.data(), a.data(), a.size());
    }
    in = a.data();
    in_dim = a.size();
  }
  const ParamTensor& Wh = net.params[2 * n_conv + 2 * n_dense];
  const ParamTensor& bh = net.params[2 * n_conv + 2 * n_dense + 1];
  return kernels::dot(Wh.v.data(), in, in_dim) + bh.v[0];
}

void backward_one(const Net& net, const SampleCache& cache, double gscale,
                  std::vector<ParamTensor>* grads) {
  const NetConfig& c = net.config;
  const int k = c.kernel_size, s = c.conv_stride;
  const size_t n_conv = c.conv_channels.size();
  const size_t n_dense = c.dense.size();

  const ConvBlockCache& last_blk = cache.blocks.back();
  const std::vector<double>& flat = last_blk.pooled;

  const double* last_act = n_dense > 0 ? cache.dense_act.back().data() : flat.data();
  const size_t last_dim = n_dense > 0 ? cache.dense_act.back().size() : flat.size();

  const size_t head_idx = 2 * n_conv + 2 * n_dense;
  const ParamTensor& Wh = net.params[head_idx];
  kernels::axpy(gscale, last_act, (*grads)[head_idx].v.data(), last_dim);
  (*grads)[head_idx + 1].v[0] += gscale;

  std::vector<double> up(last_dim);
  for (size_t j = 0; j < last_dim; ++j) up[j] = gscale * Wh.v[j];

  for (size_t l = n_dense; l-- > 0;) {
    if (!cache.dense_mask[l].empty()) {
      kernels::hadamard(up.data(), cache.dense_mask[l].data(), up.data(), up.size());
    }
    std::vector<double> dz(up.size());
    kernels::relu_grad_mask(cache.dense_pre[l].data(), up.data(), dz.data(), up.size());

    const ParamTensor& W = net.params[2 * n_conv + 2 * l];
    const double* in = l == 0 ? flat.data() : cache.dense_act[l - 1].data();
    const size_t in_dim = l == 0 ? flat.size() : cache.dense_act[l - 1].size();

    auto& gW = (*grads)[2 * n_conv + 2 * l].v;
    auto& gb = (*grads)[2 * n_conv + 2 * l + 1].v;
    std::vector<double> down(in_dim, 0.0);
    for (size_t o = 0; o < dz.size(); ++o) {
      kernels::axpy(dz[o], in, gW.data() + o * in_dim, in_dim);
      gb[o] += dz[o];
      kernels::axpy(dz[o], W.v.data() + o * in_dim, down.data(), in_dim);
    }
    up = std::move(down);
  }

  // up now holds d(pooled plane) of the last conv block.
  for (size_t blk = n_conv; blk-- > 0;) {
    const ConvBlockCache& bc = cache.blocks[blk];
    const ParamTensor& K = net.params[2 * blk];
    const int out_ch = K.shape[0];

    // Pool backward into the relu output.
    std::vector<double> dact(static_cast<size_t>(out_ch) * bc.conv_len, 0.0);
    if (c.pool == PoolKind::none) {
      dact = up;
    } else if (c.pool == PoolKind::max) {
      for (int oc = 0; oc < out_ch; ++oc) {
        for (int t = 0; t < bc.pool_len; ++t) {
          dact[static_cast<size_t>(oc) * bc.conv_len +
               bc.argmax[static_cast<size_t>(oc) * bc.pool_len + t]] +=
              up[static_cast<size_t>(oc) * bc.pool_len + t];
        }
      }
    } else {
      const double inv = 1.0 / static_cast<double>(c.pool_size);
      for (int oc = 0; oc < out_ch; ++oc) {
        for (int t = 0; t < bc.pool_len; ++t) {
          const double g = up[static_cast<size_t>(oc) * bc.pool_len + t] * inv;
          const int from = t * c.pool_stride;
          for (int j = 0; j < c.pool_size; ++j) {
            dact[static_cast<size_t>(oc) * bc.conv_len + from + j] += g;
          }
        }
      }
    }

    std::vector<double> dpre(dact.size());
    kernels::relu_grad_mask(bc.pre.data(), dact.data(), dpre.data(), dact.size());

    auto& gK = (*grads)[2 * blk].v;
    auto& gb = (*grads)[2 * blk + 1].v;
    std::vector<double> din(static_cast<size_t>(bc.in_ch) * bc.in_len, 0.0);
    for (int oc = 0; oc < out_ch; ++oc) {
      const double* dout = dpre.data() + static_cast<size_t>(oc) * bc.conv_len;
      for (int t = 0; t < bc.conv_len; ++t) {
        const double g = dout[t];
        if (g == 0.0) continue;
        gb[static_cast<size_t>(oc)] += g;
        for (int ic = 0; ic < bc.in_ch; ++ic) {
          const double* src = bc.input.data() + static_cast<size_t>(ic) * bc.in_len + t * s;
          double* gk = gK.data() + (static_cast<size_t>(oc) * bc.in_ch + ic) * k;
          kernels::axpy(g, src, gk, static_cast<size_t>(k));
          if (blk > 0) {
            const double* kern = K.v.data() + (static_cast<size_t>(oc) * bc.in_ch + ic) * k;
            kernels::axpy(g, kern, din.data() + static_cast<size_t>(ic) * bc.in_len + t * s,
                          static_cast<size_t>(k));
          }
        }
      }
    }
    up = std::move(din);
  }
}

}  // namespace

std::vector<double> cnn_predict(const Net& net, const Matrix& X) {
  std::vector<double> out(X.rows);
  SampleCache cache;
  for (size_t i = 0; i < X.rows; ++i) {
    out[i] = forward_one(net, X.row(i), false, nullptr, &cache);
  }
  return out;
}

double cnn_loss_grad(const Net& net, const Matrix& X, const std::vector<double>& y, bool training,
                     Rng* rng, std::vector<ParamTensor>* grads, double* min_gap) {
  const double inv_b = 1.0 / static_cast<double>(X.rows);
  double loss = 0.0;
  SampleCache cache;
  for (size_t i = 0; i < X.rows; ++i) {
    cache.min_gap = std::numeric_limits<double>::infinity();
    const double pred = forward_one(net, X.row(i), training, rng, &cache);
    const double r = pred - y[i];
    loss += r * r * inv_b;
    backward_one(net, cache, 2.0 * r * inv_b, grads);
    if (min_gap) *min_gap = std::min(*min_gap, cache.min_gap);
  }
  return loss;
}

}  // namespace stepcast::netimpl
