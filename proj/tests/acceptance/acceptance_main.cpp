// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria run on deterministic synthetic corpora; runtime
// limits are asserted alongside the functional checks.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "stepcast/eval.hpp"
#include "stepcast/goal.hpp"
#include "stepcast/ingest.hpp"
#include "stepcast/kernels.hpp"
#include "stepcast/manifest.hpp"
#include "stepcast/models/model_io.hpp"
#include "stepcast/pipeline.hpp"
#include "stepcast/rng.hpp"
#include "stepcast/synth.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace stepcast;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void run_criterion(const std::string& name, double time_limit_s,
                   const std::function<bool(std::string*)>& body) {
  std::string detail;
  bool ok = false;
  const auto t0 = Clock::now();
  try {
    ok = body(&detail);
  } catch (const std::exception& e) {
    ok = false;
    detail = std::string("exception: ") + e.what();
  }
  const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
  if (time_limit_s > 0 && elapsed > time_limit_s) {
    ok = false;
    detail += (detail.empty() ? "" : "; ") + std::string("exceeded time limit");
  }
  std::printf("%s %-28s (%.1fs)%s%s\n", ok ? "PASS" : "FAIL", name.c_str(), elapsed,
              detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

std::string serialize_result(const PipelineResult& r) {
  std::ostringstream out;
  if (r.granularity == Granularity::hourly) {
    write_grids_ndjson(out, r.hourly);
  } else {
    write_grids_ndjson(out, r.daily);
  }
  return out.str();
}

// ---------------------------------------------------------------------
// 1. pipeline oracle equivalence
// ---------------------------------------------------------------------

bool pipeline_oracle_equivalence(std::string* detail) {
  SynthConfig sc;
  sc.n_users = 50;
  sc.n_days = 60;
  sc.seed = 20260809;
  sc.duplicate_rate = 0.08;
  sc.coarse_record_rate = 0.05;
  sc.outlier_day_rate = 0.06;
  sc.nowear_day_rate = 0.06;
  auto records = generate_synthetic_corpus(sc);

  // A few corrupted-epoch records the study-period filter must evict.
  for (int i = 0; i < 7; ++i) {
    RawRecord r;
    r.user_id = "u00" + std::to_string(i % 5);
    r.start_time = DateTime{{1970, 1, 1}, 8 * 3600};
    r.end_time = DateTime{{1970, 1, 1}, 9 * 3600};
    r.steps = 1234;
    records.push_back(r);
  }

  PipelineConfig pc;
  pc.study_period = {{2015, 3, 2}, {2015, 6, 30}};
  for (auto granularity : {Granularity::hourly, Granularity::daily}) {
    for (auto policy : {CoarsePolicy::drop, CoarsePolicy::split}) {
      pc.granularity = granularity;
      pc.coarse_record_policy = policy;
      const std::string mine = serialize_result(run_pipeline(records, pc));
      const std::string ref = serialize_result(oracles::reference_run_pipeline(records, pc));
      if (mine != ref) {
        *detail = std::string("mismatch at granularity=") + to_string(granularity) +
                  " policy=" + to_string(policy);
        return false;
      }
    }
  }
  *detail = std::to_string(records.size()) + " records, 4 config variants";
  return true;
}

// ---------------------------------------------------------------------
// 2. conservation under the drop policy
// ---------------------------------------------------------------------

bool conservation(std::string* detail) {
  Rng rng(7001);
  for (int trial = 0; trial < 100; ++trial) {
    SynthConfig sc;
    sc.n_users = 2 + static_cast<int>(rng.below(4));
    sc.n_days = 4 + static_cast<int>(rng.below(10));
    sc.seed = rng.next_u64();
    sc.duplicate_rate = 0.0;  // duplicates are a dedup concern, not resample's
    sc.coarse_record_rate = rng.uniform(0.0, 0.3);
    auto records = generate_synthetic_corpus(sc);

    int64_t retained = 0;
    for (const auto& r : records) {
      if (r.duration_seconds() <= 3600) retained += r.steps;
    }
    PipelineConfig pc;
    auto grids = resample_hourly(records, pc);
    int64_t bucketed = 0;
    for (const auto& g : grids) {
      for (const auto& d : g.days) bucketed += d.total();
    }
    if (bucketed != retained) {
      *detail = "trial " + std::to_string(trial) + ": " + std::to_string(bucketed) +
                " != " + std::to_string(retained);
      return false;
    }
  }
  *detail = "100 corpora, exact integer equality";
  return true;
}

// ---------------------------------------------------------------------
// 3. gradient checks across random configurations
// ---------------------------------------------------------------------

bool gradient_checks(std::string* detail) {
  int checked = 0, redraws = 0;
  double worst = 0.0;
  Rng meta(9001);

  for (int i = 0; i < 102; ++i) {
    const Arch arch = i % 3 == 0 ? Arch::mlp : (i % 3 == 1 ? Arch::cnn1d : Arch::lstm);
    // Finite differences are invalid within the step size of a relu kink
    // or max-pool tie; draws that land there are redrawn.
    for (uint64_t attempt = 0;; ++attempt) {
      if (attempt >= 50) {
        *detail = "config " + std::to_string(i) + ": no kink-free draw in 50 attempts";
        return false;
      }
      const uint64_t seed = mix_seed(0xACCE97ULL, static_cast<uint64_t>(i) * 64 + attempt);
      Rng rng(seed);

      NetConfig c;
      c.arch = arch;
      c.seed = seed;
      InputShape shape{0, 1 + static_cast<int>(rng.below(2))};
      switch (arch) {
        case Arch::mlp: {
          c.hidden.clear();
          const int layers = 1 + static_cast<int>(rng.below(2));
          for (int l = 0; l < layers; ++l) c.hidden.push_back(3 + static_cast<int>(rng.below(5)));
          shape.slots = 4 + static_cast<int>(rng.below(6));
          break;
        }
        case Arch::cnn1d: {
          c.conv_channels = {2 + static_cast<int>(rng.below(3))};
          c.kernel_size = 2 + static_cast<int>(rng.below(3));
          c.conv_stride = 1 + static_cast<int>(rng.below(2));
          const int pool_pick = static_cast<int>(rng.below(3));
          c.pool = pool_pick == 0 ? PoolKind::none : (pool_pick == 1 ? PoolKind::max : PoolKind::avg);
          c.pool_size = 2;
          c.pool_stride = 2;
          c.dense.clear();
          if (rng.below(2) == 0) c.dense.push_back(3 + static_cast<int>(rng.below(3)));
          shape.slots = 10 + static_cast<int>(rng.below(7));
          break;
        }
        case Arch::lstm: {
          c.lstm_layers = 1 + static_cast<int>(rng.below(3));
          c.lstm_hidden = 2 + static_cast<int>(rng.below(4));
          shape.slots = 3 + static_cast<int>(rng.below(5));
          break;
        }
      }

      Net net = net_init(c, shape);
      const size_t batch = 2 + rng.below(3);
      Matrix X(batch, static_cast<size_t>(shape.flat()));
      for (auto& v : X.a) v = rng.normal();
      std::vector<double> y(batch);
      for (auto& v : y) v = rng.normal();

      LossGrad lg = net_loss_grad(net, X, y, false, nullptr);
      if (lg.min_nonlinearity_gap < 1e-3) {
        ++redraws;
        continue;
      }
      auto rep = gradcheck::check(net, X, y, 1e-5, 1e-4);
      worst = std::max(worst, rep.max_rel_err);
      if (!rep.ok) {
        *detail = "config " + std::to_string(i) + " (" + to_string(arch) + ", seed " +
                  std::to_string(seed) + "): rel err " + std::to_string(rep.max_rel_err) + " at " +
                  rep.worst;
        return false;
      }
      ++checked;
      break;
    }
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%d configs, %d redraws, worst rel err %.2e", checked, redraws,
                worst);
  *detail = buf;
  return checked >= 100;
}

// ---------------------------------------------------------------------
// 4. ridge oracle
// ---------------------------------------------------------------------

bool ridge_oracle(std::string* detail) {
  Rng rng(1101);
  const double lambdas[] = {0.0, 0.1, 1.0, 10.0};
  int done = 0;
  while (done < 20) {
    const size_t n = 12 + rng.below(39);  // <= 50, comfortably > d
    const size_t d = 1 + rng.below(10);
    const double lambda = lambdas[done % 4];
    Matrix X(n, d);
    for (auto& v : X.a) v = rng.uniform(-3, 3);
    std::vector<double> y(n);
    for (auto& v : y) v = rng.uniform(-50, 50);

    LinearModel m = ridge_fit(X, y, RidgeConfig{lambda, true});
    auto oracle = oracles::ridge_normal_equations(X, y, lambda, true);
    for (size_t j = 0; j < d; ++j) {
      if (std::fabs(m.weights[j] - oracle.weights[j]) >
          1e-8 * std::max(1.0, std::fabs(oracle.weights[j]))) {
        *detail = "problem " + std::to_string(done) + ": weight " + std::to_string(j) + " differs";
        return false;
      }
    }
    if (std::fabs(m.intercept - oracle.intercept) > 1e-8 * std::max(1.0, std::fabs(oracle.intercept))) {
      *detail = "problem " + std::to_string(done) + ": intercept differs";
      return false;
    }
    ++done;
  }
  *detail = "20 problems, lambda in {0, 0.1, 1, 10}, tol 1e-8";
  return true;
}

// ---------------------------------------------------------------------
// 5. tree root-split oracle
// ---------------------------------------------------------------------

bool tree_split_oracle(std::string* detail) {
  Rng rng(1202);
  for (int trial = 0; trial < 50; ++trial) {
    const size_t n = 4 + rng.below(27);
    const size_t d = 1 + rng.below(3);
    Matrix X(n, d);
    for (auto& v : X.a) v = rng.uniform(-5, 5);
    std::vector<double> y(n);
    for (auto& v : y) v = rng.uniform(-100, 100);

    TreeModel m = tree_fit(X, y, TreeConfig{});
    auto oracle = oracles::brute_force_root_split(X, y, 1);
    if (!oracle.found || m.nodes[0].is_leaf || m.nodes[0].feature != oracle.feature ||
        std::fabs(m.nodes[0].threshold - oracle.threshold) > 1e-12) {
      *detail = "trial " + std::to_string(trial) + ": split (" +
                std::to_string(m.nodes[0].feature) + ", " + std::to_string(m.nodes[0].threshold) +
                ") vs oracle (" + std::to_string(oracle.feature) + ", " +
                std::to_string(oracle.threshold) + ")";
      return false;
    }
  }
  *detail = "50 datasets, exhaustive search agreement";
  return true;
}

// ---------------------------------------------------------------------
// 6. gradient boosting monotonicity
// ---------------------------------------------------------------------

bool gb_monotonicity(std::string* detail) {
  Rng rng(1303);
  for (int trial = 0; trial < 20; ++trial) {
    const size_t n = 10 + rng.below(50);
    const size_t d = 1 + rng.below(4);
    Matrix X(n, d);
    for (auto& v : X.a) v = rng.uniform(-5, 5);
    std::vector<double> y(n);
    for (auto& v : y) v = rng.uniform(-30, 30);

    GBConfig c;
    c.n_stages = 30;
    c.learning_rate = trial % 2 == 0 ? 0.1 : 0.7;
    c.subsample = 1.0;
    c.tree.max_depth = 2 + static_cast<int>(rng.below(3));
    GBModel m = gbr_fit(X, y, c);
    for (size_t s = 1; s < m.train_mse_per_stage.size(); ++s) {
      if (m.train_mse_per_stage[s] > m.train_mse_per_stage[s - 1] + 1e-9) {
        *detail = "trial " + std::to_string(trial) + ": MSE rose at stage " + std::to_string(s);
        return false;
      }
    }
  }
  *detail = "20 datasets x 30 stages, non-increasing";
  return true;
}

// ---------------------------------------------------------------------
// 7. end-to-end skill through the CLI
// ---------------------------------------------------------------------

#ifndef STEPCAST_CLI_PATH
#define STEPCAST_CLI_PATH "stepcast"
#endif

int run_cli(const std::string& args) {
  const std::string cmd = std::string(STEPCAST_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / "stepcast_acceptance" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

bool end_to_end_skill(std::string* detail) {
  const fs::path root = fresh_dir("chain");
  const std::string r = root.string();

  if (run_cli("synth --users 30 --days 45 --seed 2026 --nowear-day-rate 0.04 --duplicate-rate 0.05"
              " --out " + r + "/synth") != 0) {
    *detail = "synth failed";
    return false;
  }
  if (run_cli("ingest --input " + r + "/synth/records.ndjson --format ndjson --mode strict --out " +
              r + "/ingest") != 0) {
    *detail = "ingest failed";
    return false;
  }
  // Pipeline config: defaults plus an explicit study period.
  {
    std::ofstream cfg(root / "pipeline.json");
    cfg << R"({"study_period": {"start_date": "2015-03-02", "end_date": "2015-12-31"},)"
        << R"( "granularity": "hourly", "window_days": 3})";
  }
  if (run_cli("process --input " + r + "/ingest/records.ndjson --config " + r +
              "/pipeline.json --out " + r + "/process") != 0) {
    *detail = "process failed";
    return false;
  }
  if (run_cli("build --input " + r + "/process/grids.ndjson --window-days 3 --features steps"
              " --pipeline-config " + r + "/pipeline.json --out " + r + "/build") != 0) {
    *detail = "build failed";
    return false;
  }
  if (run_cli("train --dataset " + r + "/build/dataset.bin --model ridge --out " + r +
              "/train_ridge") != 0) {
    *detail = "train ridge failed";
    return false;
  }
  {
    std::ofstream cfg(root / "mlp.json");
    cfg << R"({"hidden": [64, 32], "train": {"learning_rate": 0.001, "batch_size": 64,)"
        << R"( "max_epochs": 60, "patience": 10, "seed": 7}})";
  }
  if (run_cli("train --dataset " + r + "/build/dataset.bin --model mlp --config " + r +
              "/mlp.json --out " + r + "/train_mlp") != 0) {
    *detail = "train mlp failed";
    return false;
  }
  if (run_cli("evaluate --dataset " + r + "/build/dataset.bin --models " + r +
              "/train_ridge/model.json," + r + "/train_mlp/model.json --out " + r + "/eval") != 0) {
    *detail = "evaluate failed";
    return false;
  }

  std::ifstream in(root / "eval" / "report.json");
  nlohmann::json report = nlohmann::json::parse(in);
  double baseline = -1, ridge = -1, mlp = -1;
  for (const auto& row : report.at("models")) {
    const std::string fam = row.at("family").get<std::string>();
    const double test_mae = row.at("test").at("mae").get<double>();
    if (fam == "baseline") baseline = test_mae;
    if (fam == "ridge") ridge = test_mae;
    if (fam == "mlp") mlp = test_mae;
  }
  if (baseline <= 0 || ridge < 0 || mlp < 0) {
    *detail = "report missing rows";
    return false;
  }
  char buf[160];
  std::snprintf(buf, sizeof(buf), "baseline %.0f, ridge %.0f (%.2fx), mlp %.0f (%.2fx)", baseline,
                ridge, ridge / baseline, mlp, mlp / baseline);
  *detail = buf;
  return ridge <= 0.8 * baseline && mlp <= 0.8 * baseline;
}

// ---------------------------------------------------------------------
// 8. experiment-shape reproduction (sweep)
// ---------------------------------------------------------------------

bool experiment_shape(std::string* detail) {
  SynthConfig sc;
  sc.n_users = 24;
  sc.n_days = 50;
  sc.seed = 424242;
  sc.outlier_day_rate = 0.10;
  sc.nowear_day_rate = 0.02;
  auto records = generate_synthetic_corpus(sc);

  PipelineConfig base;
  SweepSpec spec;  // {hourly, daily} x W 1..6, outlier removal on
  SweepReport grid12 = config_sweep(records, base, spec);
  if (grid12.cells.size() != 12) {
    *detail = "expected 12 cells, got " + std::to_string(grid12.cells.size());
    return false;
  }
  for (const auto& c : grid12.cells) {
    if (c.empty) {
      *detail = std::string("empty cell at ") + to_string(c.granularity) + " W=" +
                std::to_string(c.window_days);
      return false;
    }
  }

  SweepSpec toggle;
  toggle.granularities = {Granularity::hourly};
  toggle.window_days = {3};
  toggle.outlier_removal = {false, true};
  SweepReport pair = config_sweep(records, base, toggle);
  if (pair.cells.size() != 2 || pair.cells[0].empty || pair.cells[1].empty) {
    *detail = "outlier toggle cells missing";
    return false;
  }
  const double without = pair.cells[0].mae;
  const double with_removal = pair.cells[1].mae;
  char buf[128];
  std::snprintf(buf, sizeof(buf), "12 cells populated; MAE with removal %.1f <= without %.1f",
                with_removal, without);
  *detail = buf;
  return with_removal <= without;
}

// ---------------------------------------------------------------------
// 9. metrics exactness + cyclic identity
// ---------------------------------------------------------------------

bool metrics_exactness(std::string* detail) {
  struct Row {
    std::vector<double> y, yhat;
    double mae, mdae;
  };
  const Row rows[] = {
      {{2, 4}, {1, 5}, 1.0, 1.0},
      {{0, 0, 10}, {0, 0, 0}, 10.0 / 3.0, 0.0},
      {{1, 2, 3}, {1, 2, 3}, 0.0, 0.0},
      {{5}, {2}, 3.0, 3.0},
      {{1, 2, 3, 4}, {2, 4, 1, 0}, 2.25, 2.0},
      {{10, 20, 30, 40, 50}, {11, 18, 33, 44, 45}, 3.0, 3.0},
      {{-5, 5}, {5, -5}, 10.0, 10.0},
      {{0, 0, 0, 0}, {1, 2, 3, 4}, 2.5, 2.5},
      {{100, 200}, {100, 260}, 30.0, 30.0},
      {{7, 7, 7, 7, 7, 7}, {7, 8, 5, 7, 10, 6}, 7.0 / 6.0, 1.0},
      {{1.5, 2.5, 3.5}, {1.0, 3.0, 3.0}, 0.5, 0.5},
      {{0, 1000, 2000, 3000}, {500, 1500, 2500, 3500}, 500.0, 500.0},
  };
  int i = 0;
  for (const auto& row : rows) {
    if (std::fabs(mae(row.y, row.yhat) - row.mae) > 1e-12 ||
        std::fabs(mdae(row.y, row.yhat) - row.mdae) > 1e-12) {
      *detail = "fixed vector " + std::to_string(i) + " mismatch";
      return false;
    }
    ++i;
  }

  // Every emitted cyclic pair satisfies sin^2 + cos^2 = 1 within 1e-9.
  SynthConfig sc;
  sc.n_users = 6;
  sc.n_days = 20;
  sc.seed = 5150;
  PipelineConfig pc;
  pc.outlier_removal_enabled = false;
  PipelineResult pr = run_pipeline(generate_synthetic_corpus(sc), pc);
  WindowConfig wc;
  wc.window_days = 2;
  FeatureConfig fc;
  fc.include_cyclic = true;
  WindowedDataset ds = build_windows(pr.hourly, wc, fc);
  if (ds.examples.empty()) {
    *detail = "cyclic dataset empty";
    return false;
  }
  size_t pairs = 0;
  for (size_t j = 0; j + 1 < ds.feature_names.size(); ++j) {
    const std::string& name = ds.feature_names[j];
    auto pos = name.find("sin_");
    if (pos == std::string::npos) continue;
    std::string cos_name = name;
    cos_name.replace(pos, 4, "cos_");
    if (ds.feature_names[j + 1] != cos_name) {
      *detail = "cyclic pair layout broken at " + name;
      return false;
    }
    for (const auto& ex : ds.examples) {
      const double s = ex.features[j], c = ex.features[j + 1];
      if (std::fabs(s * s + c * c - 1.0) > 1e-9) {
        *detail = "unit-circle identity violated at " + name;
        return false;
      }
    }
    ++pairs;
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%d fixed vectors; %zu cyclic pairs over %zu rows", i, pairs,
                ds.examples.size());
  *detail = buf;
  return pairs > 0;
}

// ---------------------------------------------------------------------
// 10. determinism & serialization
// ---------------------------------------------------------------------

bool files_equal(const fs::path& a, const fs::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  if (!fa || !fb) return false;
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  return sa.str() == sb.str();
}

// Re-runs a completed command from its manifest argv into a fresh --out
// and expects byte-identical artifacts.
bool rerun_from_manifest(const fs::path& out_dir, const std::string& tag, std::string* detail) {
  RunManifest m = RunManifest::from_json_file((out_dir / "manifest.json").string());
  std::vector<std::string> argv = m.argv;
  fs::path redo = fresh_dir("redo_" + tag);
  for (size_t i = 0; i + 1 < argv.size(); ++i) {
    if (argv[i] == "--out") argv[i + 1] = redo.string();
  }
  std::string joined;
  for (const auto& a : argv) joined += a + " ";
  if (run_cli(joined) != 0) {
    *detail = tag + ": re-run exited nonzero";
    return false;
  }
  for (const auto& [artifact, fp] : m.outputs) {
    if (!files_equal(out_dir / artifact, redo / artifact)) {
      *detail = tag + ": " + artifact + " differs on re-run";
      return false;
    }
    if (fingerprint_file((redo / artifact).string()) != fp) {
      *detail = tag + ": " + artifact + " fingerprint drifted";
      return false;
    }
  }
  return true;
}

bool determinism_serialization(std::string* detail) {
  // The end-to-end chain left its artifacts behind; re-run every stage
  // from its manifest.
  const fs::path root = fs::temp_directory_path() / "stepcast_acceptance" / "chain";
  for (const std::string tag :
       {"synth", "ingest", "process", "build", "train_ridge", "train_mlp", "eval"}) {
    if (!fs::exists(root / tag / "manifest.json")) {
      *detail = tag + ": missing manifest (chain criterion must run first)";
      return false;
    }
    if (!rerun_from_manifest(root / tag, tag, detail)) return false;
  }

  // Model documents round-trip with exact prediction equality.
  DatasetBundle bundle = load_dataset((root / "build" / "dataset.bin").string());
  WindowedDataset test_scaled = apply_scaler(bundle.scaler, bundle.splits.test);
  const Matrix X = feature_matrix(test_scaled);
  for (const std::string tag : {"train_ridge", "train_mlp"}) {
    ModelDocument doc = load_model((root / tag / "model.json").string());
    auto before = instantiate(doc)->predict(X);
    ModelDocument again = ModelDocument::from_json(doc.to_json());
    auto after = instantiate(again)->predict(X);
    if (before != after) {
      *detail = tag + ": predictions changed after round-trip";
      return false;
    }
  }
  *detail = "7 commands re-run bit-identically; 2 model docs round-trip exactly";
  return true;
}

// ---------------------------------------------------------------------
// 11. goal rule
// ---------------------------------------------------------------------

bool goal_rule(std::string* detail) {
  GoalConfig g;
  if (adaptive_goal(10000, g) != 11000) {
    *detail = "adaptive_goal(10000) != 11000";
    return false;
  }
  int64_t prev = -1;
  for (int i = 0; i <= 1000; ++i) {
    const double p = 23.77 * i;
    const int64_t goal = adaptive_goal(p, g);
    if (goal < prev) {
      *detail = "monotonicity broke at scan point " + std::to_string(i);
      return false;
    }
    prev = goal;
  }
  *detail = "10% rule exact; 1001-point scan monotone";
  return true;
}

}  // namespace

int main() {
  std::printf("stepcast acceptance suite (kernels: %s)\n", kernels::backend_name());
  run_criterion("pipeline-oracle-equivalence", 30, pipeline_oracle_equivalence);
  run_criterion("conservation", 0, conservation);
  run_criterion("gradient-checks", 300, gradient_checks);
  run_criterion("ridge-oracle", 0, ridge_oracle);
  run_criterion("tree-split-oracle", 0, tree_split_oracle);
  run_criterion("gb-monotonicity", 0, gb_monotonicity);
  run_criterion("end-to-end-skill", 300, end_to_end_skill);
  run_criterion("experiment-shape", 0, experiment_shape);
  run_criterion("metrics-exactness", 0, metrics_exactness);
  run_criterion("determinism-serialization", 0, determinism_serialization);
  run_criterion("goal-rule", 0, goal_rule);

  if (g_failures > 0) {
    std::printf("%d criterion(s) FAILED\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
