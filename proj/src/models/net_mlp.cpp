#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "stepcast/kernels.hpp"
#include "stepcast/models/net.hpp"

namespace stepcast::netimpl {

namespace {

// Dense layer views over the parameter list: W at 2l, b at 2l+1; the head
// is the final pair.
struct DenseView {
  const ParamTensor* W;
  const ParamTensor* b;
  int out, in;
};

DenseView dense_at(const std::vector<ParamTensor>& params, size_t l) {
  const ParamTensor& W = params[2 * l];
  return DenseView{&W, &params[2 * l + 1], W.shape[0], W.shape[1]};
}

struct SampleCache {
  std::vector<std::vector<double>> pre;   // preactivation per hidden layer
  std::vector<std::vector<double>> act;   // post relu (+ dropout) per hidden layer
  std::vector<std::vector<double>> mask;  // inverted-dropout multipliers
  double min_gap = std::numeric_limits<double>::infinity();  // distance to relu kinks
};

double forward_one(const Net& net, const double* x, bool training, Rng* rng, SampleCache* cache) {
  const size_t n_hidden = net.config.hidden.size();
  const double p = net.config.dropout;
  const bool use_dropout = training && p > 0.0;
  cache->pre.resize(n_hidden);
  cache->act.resize(n_hidden);
  cache->mask.assign(n_hidden, {});

  const double* in = x;
  size_t in_dim = static_cast<size_t>(net.input.flat());
  for (size_t l = 0; l < n_hidden; ++l) {
    DenseView d = dense_at(net.params, l);
    auto& z = cache->pre[l];
    z.resize(static_cast<size_t>(d.out));
    for (int o = 0; o < d.out; ++o) {
      z[static_cast<size_t>(o)] =
          kernels::dot(d.W->v.data() + static_cast<size_t>(o) * in_dim, in, in_dim) +
          d.b->v[static_cast<size_t>(o)];
    }
    for (double zv : z) cache->min_gap = std::min(cache->min_gap, std::fabs(zv));
    auto& a = cache->act[l];
    a.resize(z.size());
    kernels::relu(z.data(), a.data(), z.size());
    if (use_dropout) {
      auto& m = cache->mask[l];
      m.resize(a.size());
      const double keep = 1.0 - p;
      for (auto& mv : m) mv = rng->uniform() < keep ? 1.0 / keep : 0.0;
      kernels::hadamard(a.data(), m.data(), a.data(), a.size());
    }
    in = a.data();
    in_dim = a.size();
  }
  DenseView head = dense_at(net.params, n_hidden);
  return kernels::dot(head.W->v.data(), in, in_dim) + head.b->v[0];
}

void backward_one(const Net& net, const double* x, const SampleCache& cache, double gscale,
                  std::vector<ParamTensor>* grads) {
  const size_t n_hidden = net.config.hidden.size();
  DenseView head = dense_at(net.params, n_hidden);

  const double* last_act = n_hidden > 0 ? cache.act.back().data() : x;
  const size_t last_dim = n_hidden > 0 ? cache.act.back().size()
                                       : static_cast<size_t>(net.input.flat());

  // Head: pred = Wh . a + bh
  kernels::axpy(gscale, last_act, (*grads)[2 * n_hidden].v.data(), last_dim);
  (*grads)[2 * n_hidden + 1].v[0] += gscale;

  std::vector<double> up(last_dim);
  for (size_t j = 0; j < last_dim; ++j) up[j] = gscale * head.W->v[j];

  for (size_t l = n_hidden; l-- > 0;) {
    // Through dropout, then relu.
    if (!cache.mask[l].empty()) {
      kernels::hadamard(up.data(), cache.mask[l].data(), up.data(), up.size());
    }
    std::vector<double> dz(up.size());
    kernels::relu_grad_mask(cache.pre[l].data(), up.data(), dz.data(), up.size());

    DenseView d = dense_at(net.params, l);
    const double* in = l == 0 ? x : cache.act[l - 1].data();
    const size_t in_dim = l == 0 ? static_cast<size_t>(net.input.flat()) : cache.act[l - 1].size();

    auto& gW = (*grads)[2 * l].v;
    auto& gb = (*grads)[2 * l + 1].v;
    for (int o = 0; o < d.out; ++o) {
      kernels::axpy(dz[static_cast<size_t>(o)], in, gW.data() + static_cast<size_t>(o) * in_dim,
                    in_dim);
      gb[static_cast<size_t>(o)] += dz[static_cast<size_t>(o)];
    }
    if (l == 0) break;

    std::vector<double> down(in_dim, 0.0);
    for (int o = 0; o < d.out; ++o) {
      kernels::axpy(dz[static_cast<size_t>(o)], d.W->v.data() + static_cast<size_t>(o) * in_dim,
                    down.data(), in_dim);
    }
    up = std::move(down);
  }
}

}  // namespace

std::vector<double> mlp_predict(const Net& net, const Matrix& X) {
  std::vector<double> out(X.rows);
  SampleCache cache;
  for (size_t i = 0; i < X.rows; ++i) {
    out[i] = forward_one(net, X.row(i), false, nullptr, &cache);
  }
  return out;
}

double mlp_loss_grad(const Net& net, const Matrix& X, const std::vector<double>& y, bool training,
                     Rng* rng, std::vector<ParamTensor>* grads, double* min_gap) {
  const double inv_b = 1.0 / static_cast<double>(X.rows);
  double loss = 0.0;
  SampleCache cache;
  for (size_t i = 0; i < X.rows; ++i) {
    cache.min_gap = std::numeric_limits<double>::infinity();
    const double pred = forward_one(net, X.row(i), training, rng, &cache);
    const double r = pred - y[i];
    loss += r * r * inv_b;
    backward_one(net, X.row(i), cache, 2.0 * r * inv_b, grads);
    if (min_gap) *min_gap = std::min(*min_gap, cache.min_gap);
  }
  return loss;
}

}  // namespace stepcast::netimpl
