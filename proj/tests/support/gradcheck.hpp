#pragma once

// Central finite-difference gradient check for the network models.
//
// The numeric side differentiates the evaluation-mode loss
//   L(theta) = mean_i (net_predict(theta, x_i) - y_i)^2
// which is exactly the function whose analytic gradient net_loss_grad
// reports (training mode with dropout 0 equals evaluation mode). Checks
// are only meaningful where L is differentiable; callers should skip
// configurations whose min_nonlinearity_gap is within the step size's
// safety margin of a relu kink or max-pool tie.

#include <algorithm>
#include <cmath>
#include <string>

#include "stepcast/models/net.hpp"

namespace gradcheck {

struct Report {
  bool ok = true;
  double max_rel_err = 0.0;
  std::string worst;   // "tensor[idx]"
  size_t n_checked = 0;
};

inline double eval_loss(const stepcast::Net& net, const stepcast::Matrix& X,
                        const std::vector<double>& y) {
  auto pred = stepcast::net_predict(net, X);
  double acc = 0.0;
  for (size_t i = 0; i < y.size(); ++i) {
    const double r = pred[i] - y[i];
    acc += r * r;
  }
  return acc / static_cast<double>(y.size());
}

inline Report check(const stepcast::Net& net, const stepcast::Matrix& X,
                    const std::vector<double>& y, double h = 1e-5, double tol = 1e-4) {
  Report report;
  stepcast::LossGrad lg = stepcast::net_loss_grad(net, X, y, false, nullptr);
  stepcast::Net probe = net;

  for (size_t t = 0; t < net.params.size(); ++t) {
    for (size_t i = 0; i < net.params[t].v.size(); ++i) {
      const double saved = probe.params[t].v[i];
      probe.params[t].v[i] = saved + h;
      const double up = eval_loss(probe, X, y);
      probe.params[t].v[i] = saved - h;
      const double down = eval_loss(probe, X, y);
      probe.params[t].v[i] = saved;

      const double numeric = (up - down) / (2.0 * h);
      const double analytic = lg.grads[t].v[i];
      const double rel = std::fabs(analytic - numeric) /
                         std::max(std::fabs(analytic) + std::fabs(numeric), 1e-3);
      ++report.n_checked;
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst = net.params[t].name + "[" + std::to_string(i) + "]";
      }
      if (rel >= tol) report.ok = false;
    }
  }
  return report;
}

}  // namespace gradcheck
