#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "stepcast/dataset.hpp"
#include "stepcast/eval.hpp"
#include "stepcast/goal.hpp"
#include "stepcast/manifest.hpp"
#include "stepcast/models/model_io.hpp"
#include "stepcast/pipeline.hpp"
#include "stepcast/synth.hpp"

using namespace stepcast;

TEST_CASE("adaptive goal applies the 10% uplift with half-up rounding") {
  GoalConfig g;
  CHECK(adaptive_goal(10000, g) == 11000);
  CHECK(adaptive_goal(0, g) == 0);
  CHECK(adaptive_goal(5, g) == 6);       // 5.5 rounds half-up
  CHECK(adaptive_goal(995, g) == 1095);  // 1094.5 -> 1095

  GoalConfig capped = g;
  capped.ceiling_steps = 10000;
  CHECK(adaptive_goal(9500, capped) == 10000);  // 10450 clamped
  GoalConfig floored = g;
  floored.floor_steps = 2000;
  CHECK(adaptive_goal(100, floored) == 2000);

  CHECK_THROWS_AS(adaptive_goal(-1, g), std::invalid_argument);
  GoalConfig bad;
  bad.uplift = -0.1;
  CHECK_THROWS_AS(adaptive_goal(100, bad), std::invalid_argument);
  GoalConfig inverted;
  inverted.floor_steps = 100;
  inverted.ceiling_steps = 50;
  CHECK_THROWS_AS(adaptive_goal(100, inverted), std::invalid_argument);
}

TEST_CASE("adaptive goal is monotone and never below the prediction") {
  GoalConfig g;
  int64_t prev = -1;
  for (int i = 0; i <= 1000; ++i) {
    const double p = 17.3 * i;
    const int64_t goal = adaptive_goal(p, g);
    CHECK(goal >= prev);
    CHECK(static_cast<double>(goal) >= p - 0.5);  // goal(p) >= p up to rounding
    prev = goal;
  }
}

namespace {

struct TrainedFixture {
  ModelDocument doc;
  std::vector<RawRecord> records;
  DatasetSplits splits;
  Scaler scaler;
  WindowedDataset test_scaled;
};

TrainedFixture make_fixture() {
  SynthConfig sc;
  sc.n_users = 10;
  sc.n_days = 30;
  sc.seed = 31;
  TrainedFixture fx;
  fx.records = generate_synthetic_corpus(sc);

  PipelineConfig pc;
  pc.outlier_removal_enabled = false;  // keep the inference path identical
  PipelineResult pr = run_pipeline(fx.records, pc);

  WindowConfig wc;
  wc.window_days = 3;
  WindowedDataset ds = build_windows(pr.hourly, wc, FeatureConfig{});
  fx.splits = chronological_split(ds, SplitRatios{});
  fx.scaler = fit_scaler(fx.splits.train);
  WindowedDataset train_scaled = apply_scaler(fx.scaler, fx.splits.train);
  WindowedDataset val_scaled = apply_scaler(fx.scaler, fx.splits.val);
  fx.test_scaled = apply_scaler(fx.scaler, fx.splits.test);

  FitOutput fit = fit_family(ModelFamily::ridge, R"({"lambda": 1.0})", train_scaled, val_scaled,
                             fx.scaler, pc.to_json());
  fx.doc = fit.doc;
  return fx;
}

}  // namespace

TEST_CASE("predict_next_day matches the evaluation path window for window") {
  TrainedFixture fx = make_fixture();
  auto model = instantiate(fx.doc);

  // Pick a test example and rebuild its input from raw records: feed only
  // the user's records up to (and excluding) the target date.
  REQUIRE(!fx.test_scaled.examples.empty());
  int checked = 0;
  for (size_t i = 0; i < fx.test_scaled.examples.size() && checked < 5; ++i) {
    const Example& ex = fx.test_scaled.examples[i];
    std::vector<RawRecord> history;
    for (const auto& r : fx.records) {
      if (r.user_id == ex.user_id && r.start_time.date < ex.target_date) history.push_back(r);
    }
    // The example's window is the W consecutive days right before its
    // target date, which is exactly the trailing window the inference
    // path forms from this history; the two predictions must be equal.
    const double via_inference = predict_next_day(fx.doc, history);
    Matrix X(1, ex.features.size());
    std::copy(ex.features.begin(), ex.features.end(), X.row(0));
    double via_eval = invert_target(fx.scaler, model->predict(X)[0]);
    if (via_eval < 0.0) via_eval = 0.0;

    CAPTURE(ex.user_id);
    CAPTURE(ex.target_date.to_string());
    CHECK(via_inference == via_eval);
    ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("predict_next_day demands enough consecutive history") {
  TrainedFixture fx = make_fixture();
  const std::string user = fx.splits.train.examples[0].user_id;
  std::vector<RawRecord> history;
  for (const auto& r : fx.records) {
    if (r.user_id == user && r.start_time.date < Date{2015, 3, 4}) history.push_back(r);
  }
  // Only two clean days available for W=3.
  try {
    predict_next_day(fx.doc, history);
    FAIL("expected InsufficientHistory");
  } catch (const InsufficientHistory& e) {
    CHECK(e.required_days == 3);
    CHECK(e.available_days == 2);
    CHECK(std::string(e.what()).find("insufficient history") != std::string::npos);
  }
}

TEST_CASE("predict_next_day returns a finite nonnegative count") {
  TrainedFixture fx = make_fixture();
  const std::string user = fx.splits.train.examples[0].user_id;
  std::vector<RawRecord> history;
  for (const auto& r : fx.records) {
    if (r.user_id == user) history.push_back(r);
  }
  const double p = predict_next_day(fx.doc, history);
  CHECK(std::isfinite(p));
  CHECK(p >= 0.0);

  SUBCASE("multi-user history needs an explicit id") {
    CHECK_THROWS_AS(predict_next_day(fx.doc, fx.records), std::invalid_argument);
    CHECK(predict_next_day(fx.doc, fx.records, user) == p);
  }
}

TEST_CASE("classic model documents round-trip with exact predictions") {
  TrainedFixture fx = make_fixture();
  WindowedDataset train_scaled = apply_scaler(fx.scaler, fx.splits.train);
  const Matrix X = feature_matrix(fx.test_scaled);

  for (ModelFamily family :
       {ModelFamily::baseline, ModelFamily::ridge, ModelFamily::tree, ModelFamily::gb}) {
    CAPTURE(to_string(family));
    std::string config = family == ModelFamily::gb ? R"({"n_stages": 20})" : "";
    FitOutput fit = fit_family(family, config, train_scaled, WindowedDataset{}, fx.scaler, "");
    auto before = instantiate(fit.doc)->predict(X);

    ModelDocument restored = ModelDocument::from_json(fit.doc.to_json());
    auto after = instantiate(restored)->predict(X);
    CHECK(before == after);
  }
}

TEST_CASE("manifest fingerprints and round-trip") {
  const char bytes[] = "stepcast";
  const std::string fp = fingerprint_bytes(bytes, 8);
  CHECK(fp.rfind("fnv1a64:", 0) == 0);
  CHECK(fp == fingerprint_bytes(bytes, 8));
  CHECK(fp != fingerprint_bytes(bytes, 7));

  RunManifest m;
  m.tool_version = "0.1.0";
  m.command = "synth";
  m.argv = {"synth", "--users", "5", "--out", "x"};
  m.seeds["synth"] = 7;
  m.config_hashes["pipeline.json"] = fp;
  m.input_fingerprints["records.ndjson"] = fp;
  m.outputs["records.ndjson"] = fp;
  m.timestamp = "2026-01-01T00:00:00Z";
  m.kernel_backend = "avx2";

  RunManifest back = RunManifest::from_json(m.to_json());
  CHECK(back.to_json() == m.to_json());
  CHECK(back.argv == m.argv);
  CHECK(back.seeds.at("synth") == 7);

  auto dir = std::filesystem::temp_directory_path() / "stepcast_manifest_test";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "manifest.json").string();
  write_manifest_file(path, m);
  CHECK(RunManifest::from_json_file(path).to_json() == m.to_json());
  std::filesystem::remove_all(dir);
}
