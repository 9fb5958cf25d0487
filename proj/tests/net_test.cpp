#include <doctest.h>

#include <cmath>

#include "stepcast/models/model_io.hpp"
#include "stepcast/models/net.hpp"
#include "stepcast/rng.hpp"
#include "support/gradcheck.hpp"

using namespace stepcast;

namespace {

Matrix random_batch(Rng* rng, size_t b, size_t d) {
  Matrix X(b, d);
  for (auto& v : X.a) v = rng->normal();
  return X;
}

std::vector<double> random_targets(Rng* rng, size_t b) {
  std::vector<double> y(b);
  for (auto& v : y) v = rng->normal();
  return y;
}

size_t tensor_elems(const Net& net, const std::string& name) {
  for (const auto& p : net.params) {
    if (p.name == name) return p.size();
  }
  FAIL("missing tensor ", name);
  return 0;
}

}  // namespace

TEST_CASE("parameter counts follow the closed-form formulas") {
  SUBCASE("mlp hidden [4] on 3 inputs") {
    NetConfig c;
    c.arch = Arch::mlp;
    c.hidden = {4};
    Net net = net_init(c, InputShape{3, 1});
    CHECK(tensor_elems(net, "fc0_w") == 3 * 4);
    CHECK(tensor_elems(net, "fc0_b") == 4);
    CHECK(tensor_elems(net, "head_w") == 4);
    CHECK(tensor_elems(net, "head_b") == 1);
    CHECK(net.param_count() == 3 * 4 + 4 + 4 * 1 + 1);
  }
  SUBCASE("one lstm layer, hidden 8, input channel 1") {
    NetConfig c;
    c.arch = Arch::lstm;
    c.lstm_layers = 1;
    c.lstm_hidden = 8;
    Net net = net_init(c, InputShape{10, 1});
    // Gate-dimension count: 4*(H*(in+H)+H).
    const size_t lstm_params =
        tensor_elems(net, "lstm0_wx") + tensor_elems(net, "lstm0_wh") + tensor_elems(net, "lstm0_b");
    CHECK(lstm_params == 4 * (8 * (1 + 8) + 8));
    CHECK(net.param_count() == lstm_params + 8 + 1);
  }
  SUBCASE("conv tensor shapes") {
    NetConfig c;
    c.arch = Arch::cnn1d;
    c.conv_channels = {5};
    c.kernel_size = 4;
    c.pool = PoolKind::none;
    c.dense = {};
    Net net = net_init(c, InputShape{12, 2});
    CHECK(tensor_elems(net, "conv0_k") == 5 * 2 * 4);
    CHECK(tensor_elems(net, "conv0_b") == 5);
    // conv output 9 steps x 5 channels feeds the head.
    CHECK(tensor_elems(net, "head_w") == 45);
  }
}

TEST_CASE("initialization is deterministic in the seed") {
  NetConfig c;
  c.arch = Arch::mlp;
  c.hidden = {8, 4};
  c.seed = 31;
  Net a = net_init(c, InputShape{6, 1});
  Net b = net_init(c, InputShape{6, 1});
  REQUIRE(a.params.size() == b.params.size());
  for (size_t i = 0; i < a.params.size(); ++i) CHECK(a.params[i].v == b.params[i].v);
  c.seed = 32;
  Net d = net_init(c, InputShape{6, 1});
  CHECK(a.params[0].v != d.params[0].v);
}

TEST_CASE("lstm forget-gate bias starts open") {
  NetConfig c;
  c.arch = Arch::lstm;
  c.lstm_layers = 1;
  c.lstm_hidden = 4;
  Net net = net_init(c, InputShape{5, 1});
  const auto& b = net.params[2];
  REQUIRE(b.name == "lstm0_b");
  for (int i = 0; i < 4; ++i) CHECK(b.v[static_cast<size_t>(i)] == 0.0);
  for (int i = 4; i < 8; ++i) CHECK(b.v[static_cast<size_t>(i)] == 1.0);
}

TEST_CASE("all-zero lstm parameters force a zero prediction") {
  NetConfig c;
  c.arch = Arch::lstm;
  c.lstm_layers = 2;
  c.lstm_hidden = 3;
  Net net = net_init(c, InputShape{7, 1});
  for (auto& p : net.params) std::fill(p.v.begin(), p.v.end(), 0.0);
  Rng rng(1);
  Matrix X = random_batch(&rng, 3, 7);
  for (double p : net_predict(net, X)) CHECK(p == 0.0);
}

TEST_CASE("hand-set 1-d convolution: kernel [1,1,1] over [1,2,3,4]") {
  NetConfig c;
  c.arch = Arch::cnn1d;
  c.conv_channels = {1};
  c.kernel_size = 3;
  c.pool = PoolKind::none;
  c.dense = {};
  Net net = net_init(c, InputShape{4, 1});
  // conv0_k = [1,1,1], conv0_b = 0; head picks out each conv output in turn.
  net.params[0].v = {1, 1, 1};
  net.params[1].v = {0};
  net.params[3].v = {0};
  Matrix X(1, 4);
  X(0, 0) = 1;
  X(0, 1) = 2;
  X(0, 2) = 3;
  X(0, 3) = 4;

  net.params[2].v = {1, 0};  // head_w selects conv output 0
  CHECK(net_predict(net, X)[0] == doctest::Approx(6.0));
  net.params[2].v = {0, 1};  // conv output 1
  CHECK(net_predict(net, X)[0] == doctest::Approx(9.0));
}

TEST_CASE("single-linear mlp head reproduces an input feature") {
  NetConfig c;
  c.arch = Arch::mlp;
  c.hidden = {3};
  Net net = net_init(c, InputShape{3, 1});
  // Hidden relu layer passes x through on positive inputs: identity weights.
  net.params[0].v = {1, 0, 0, 0, 1, 0, 0, 0, 1};
  net.params[1].v = {0, 0, 0};
  net.params[2].v = {0, 1, 0};  // head reads feature 1
  net.params[3].v = {0};
  Matrix X(1, 3);
  X(0, 0) = 0.3;
  X(0, 1) = 0.7;
  X(0, 2) = 0.1;
  CHECK(net_predict(net, X)[0] == doctest::Approx(0.7));
}

TEST_CASE("analytic gradients match finite differences on small nets") {
  Rng data_rng(404);

  SUBCASE("mlp") {
    NetConfig c;
    c.arch = Arch::mlp;
    c.hidden = {5, 4};
    c.seed = 2;
    Net net = net_init(c, InputShape{6, 1});
    Matrix X = random_batch(&data_rng, 4, 6);
    auto y = random_targets(&data_rng, 4);
    REQUIRE(net_loss_grad(net, X, y, false, nullptr).min_nonlinearity_gap > 1e-3);
    auto rep = gradcheck::check(net, X, y);
    CAPTURE(rep.worst);
    CAPTURE(rep.max_rel_err);
    CHECK(rep.ok);
  }
  SUBCASE("cnn with max pooling") {
    NetConfig c;
    c.arch = Arch::cnn1d;
    c.conv_channels = {3};
    c.kernel_size = 4;
    c.pool = PoolKind::max;
    c.pool_size = 2;
    c.pool_stride = 2;
    c.dense = {4};
    c.seed = 3;
    Net net = net_init(c, InputShape{12, 2});
    Matrix X = random_batch(&data_rng, 3, 24);
    auto y = random_targets(&data_rng, 3);
    REQUIRE(net_loss_grad(net, X, y, false, nullptr).min_nonlinearity_gap > 1e-3);
    auto rep = gradcheck::check(net, X, y);
    CAPTURE(rep.worst);
    CAPTURE(rep.max_rel_err);
    CHECK(rep.ok);
  }
  SUBCASE("cnn with average pooling and stride") {
    NetConfig c;
    c.arch = Arch::cnn1d;
    c.conv_channels = {2, 3};
    c.kernel_size = 3;
    c.conv_stride = 2;
    c.pool = PoolKind::avg;
    c.pool_size = 2;
    c.pool_stride = 1;
    c.dense = {};
    c.seed = 4;
    Net net = net_init(c, InputShape{20, 1});
    Matrix X = random_batch(&data_rng, 3, 20);
    auto y = random_targets(&data_rng, 3);
    REQUIRE(net_loss_grad(net, X, y, false, nullptr).min_nonlinearity_gap > 1e-3);
    auto rep = gradcheck::check(net, X, y);
    CAPTURE(rep.worst);
    CAPTURE(rep.max_rel_err);
    CHECK(rep.ok);
  }
  SUBCASE("stacked lstm (backpropagation through time)") {
    NetConfig c;
    c.arch = Arch::lstm;
    c.lstm_layers = 2;
    c.lstm_hidden = 4;
    c.seed = 5;
    Net net = net_init(c, InputShape{6, 2});
    Matrix X = random_batch(&data_rng, 3, 12);
    auto y = random_targets(&data_rng, 3);
    auto rep = gradcheck::check(net, X, y);
    CAPTURE(rep.worst);
    CAPTURE(rep.max_rel_err);
    CHECK(rep.ok);
  }
}

TEST_CASE("zero-residual batches produce zero gradients") {
  NetConfig c;
  c.arch = Arch::mlp;
  c.hidden = {4};
  c.seed = 6;
  Net net = net_init(c, InputShape{3, 1});
  Rng rng(7);
  Matrix X = random_batch(&rng, 5, 3);
  std::vector<double> y = net_predict(net, X);  // targets equal predictions
  LossGrad lg = net_loss_grad(net, X, y, false, nullptr);
  CHECK(lg.loss == 0.0);
  for (const auto& g : lg.grads) {
    for (double v : g.v) CHECK(v == 0.0);
  }
}

TEST_CASE("gradients are linear in the batch under sum reduction") {
  NetConfig c;
  c.arch = Arch::mlp;
  c.hidden = {4};
  c.seed = 8;
  Net net = net_init(c, InputShape{3, 1});
  Rng rng(9);
  Matrix X1 = random_batch(&rng, 1, 3);
  std::vector<double> y1 = {1.5};
  Matrix X2(2, 3);
  std::copy(X1.a.begin(), X1.a.end(), X2.a.begin());
  std::copy(X1.a.begin(), X1.a.end(), X2.a.begin() + 3);
  std::vector<double> y2 = {1.5, 1.5};

  LossGrad single = net_loss_grad(net, X1, y1, false, nullptr);
  LossGrad doubled = net_loss_grad(net, X2, y2, false, nullptr);
  for (size_t t = 0; t < single.grads.size(); ++t) {
    for (size_t i = 0; i < single.grads[t].v.size(); ++i) {
      // Under sum reduction (mean grad times batch size) the duplicated
      // batch carries exactly twice the single example's contribution,
      // i.e. the mean-reduction gradients coincide.
      const double sum_single = single.grads[t].v[i] * 1.0;
      const double sum_doubled = doubled.grads[t].v[i] * 2.0;
      CHECK(sum_doubled == doctest::Approx(2.0 * sum_single).epsilon(1e-12));
    }
  }
}

namespace {

// A small learnable dataset: target is a fixed linear readout of the
// (scaled) features plus the date-invariant metadata the fit expects.
WindowedDataset tiny_dataset(Rng* rng, int n, int slots) {
  WindowedDataset ds;
  ds.meta.granularity = Granularity::daily;
  ds.meta.window_days = slots;
  ds.meta.stride_days = 1;
  ds.meta.slots = slots;
  ds.meta.channels = 1;
  for (int j = 0; j < slots; ++j) ds.feature_names.push_back("d" + std::to_string(j) + "_steps");
  for (int i = 0; i < n; ++i) {
    Example ex;
    ex.user_id = "u";
    ex.target_date = Date{2015, 3, 2}.add_days(i);
    double acc = 0.0;
    for (int j = 0; j < slots; ++j) {
      double v = rng->normal();
      ex.features.push_back(v);
      acc += (j + 1) * 0.4 * v;
    }
    ex.target = acc + 0.1 * rng->normal();
    ds.examples.push_back(ex);
  }
  return ds;
}

}  // namespace

TEST_CASE("fit descends on a learnable target and stops deterministically") {
  Rng rng(55);
  WindowedDataset train = tiny_dataset(&rng, 80, 4);
  WindowedDataset val = tiny_dataset(&rng, 20, 4);
  Scaler scaler;  // identity-ish: features already standardized
  scaler.feature_mean.assign(4, 0.0);
  scaler.feature_std.assign(4, 1.0);
  scaler.target_mean = 0.0;
  scaler.target_std = 1.0;

  NetConfig nc;
  nc.arch = Arch::mlp;
  nc.hidden = {16};
  nc.seed = 12;
  TrainConfig tc;
  tc.learning_rate = 3e-3;
  tc.batch_size = 16;
  tc.max_epochs = 25;
  tc.patience = 25;
  tc.seed = 13;

  NetFitResult fit = net_fit(nc, tc, train, val, scaler);
  REQUIRE(!fit.log.train_loss.empty());
  CHECK(fit.log.train_loss.back() < fit.log.train_loss.front());
  CHECK(fit.log.best_epoch >= 0);

  SUBCASE("identical seeds reproduce the log") {
    NetFitResult again = net_fit(nc, tc, train, val, scaler);
    CHECK(again.log.train_loss == fit.log.train_loss);
    CHECK(again.log.val_mae == fit.log.val_mae);
    CHECK(again.log.best_epoch == fit.log.best_epoch);
  }
  SUBCASE("patience 0 stops at the first non-improving epoch") {
    TrainConfig eager = tc;
    eager.patience = 0;
    eager.max_epochs = 50;
    NetFitResult stopped = net_fit(nc, eager, train, val, scaler);
    const auto& mae = stopped.log.val_mae;
    // Every epoch before the last improved on the running best.
    double best = std::numeric_limits<double>::infinity();
    for (size_t e = 0; e + 1 < mae.size(); ++e) {
      CHECK(mae[e] < best);
      best = std::min(best, mae[e]);
    }
    if (mae.size() < 50) CHECK(mae.back() >= best);  // stopping epoch failed to improve
  }
  SUBCASE("selected epoch has the minimum recorded validation MAE") {
    double best = *std::min_element(fit.log.val_mae.begin(), fit.log.val_mae.end());
    CHECK(fit.log.val_mae[static_cast<size_t>(fit.log.best_epoch)] == best);
  }
}

TEST_CASE("dropout only acts in training mode") {
  NetConfig c;
  c.arch = Arch::mlp;
  c.hidden = {8};
  c.dropout = 0.5;
  c.seed = 21;
  Net net = net_init(c, InputShape{4, 1});
  Rng rng(22);
  Matrix X = random_batch(&rng, 6, 4);

  auto p1 = net_predict(net, X);
  auto p2 = net_predict(net, X);
  CHECK(p1 == p2);  // evaluation is a pure function

  auto y = random_targets(&rng, 6);
  Rng d1(77), d2(77), d3(78);
  LossGrad a = net_loss_grad(net, X, y, true, &d1);
  LossGrad b = net_loss_grad(net, X, y, true, &d2);
  LossGrad cdiff = net_loss_grad(net, X, y, true, &d3);
  CHECK(a.loss == b.loss);  // same mask stream
  CHECK(a.loss != cdiff.loss);
}

TEST_CASE("model documents round-trip with exact predictions") {
  Rng rng(501);
  for (Arch arch : {Arch::mlp, Arch::cnn1d, Arch::lstm}) {
    NetConfig c;
    c.arch = arch;
    c.hidden = {6};
    c.conv_channels = {2};
    c.kernel_size = 3;
    c.pool = PoolKind::max;
    c.pool_size = 2;
    c.pool_stride = 2;
    c.dense = {4};
    c.lstm_layers = 2;
    c.lstm_hidden = 3;
    c.seed = 61;
    InputShape shape{8, 1};
    Net net = net_init(c, shape);
    Matrix X = random_batch(&rng, 5, 8);
    auto before = net_predict(net, X);

    Net restored = net_from_json(c, shape, net_params_to_json(net));
    auto after = net_predict(restored, X);
    CHECK(before == after);  // exact, including every bit
  }
}

TEST_CASE("invalid configurations are rejected") {
  NetConfig c;
  c.arch = Arch::mlp;
  c.hidden = {};
  CHECK_THROWS_AS(net_init(c, InputShape{4, 1}), std::invalid_argument);
  c = NetConfig{};
  c.arch = Arch::cnn1d;
  c.kernel_size = 20;
  CHECK_THROWS_AS(net_init(c, InputShape{10, 1}), std::invalid_argument);  // too short
  c = NetConfig{};
  c.dropout = 1.0;
  CHECK_THROWS_AS(net_init(c, InputShape{4, 1}), std::invalid_argument);
  CHECK_THROWS_AS(net_init(NetConfig{}, InputShape{0, 1}), std::invalid_argument);
}
