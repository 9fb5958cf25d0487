// stepcast: step-count forecasting toolkit.
//
// Subcommands cover the full path from raw records to daily goals:
//   synth -> ingest -> process -> build -> train -> evaluate -> goal
// plus `sweep` for granularity/window/feature/outlier comparisons.
// Every command writes its artifacts under --out together with a
// manifest.json sufficient to re-run it bit-identically.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stepcast/eval.hpp"
#include "stepcast/goal.hpp"
#include "stepcast/ingest.hpp"
#include "stepcast/kernels.hpp"
#include "stepcast/manifest.hpp"
#include "stepcast/models/model_io.hpp"
#include "stepcast/pipeline.hpp"
#include "stepcast/synth.hpp"
#include "stepcast/version.hpp"

namespace fs = std::filesystem;
using namespace stepcast;

namespace {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
  out.flush();
  if (!out) throw std::runtime_error("I/O error writing " + path);
}

RunManifest start_manifest(const std::string& command, const std::vector<std::string>& argv) {
  RunManifest m;
  m.tool_version = kToolVersion;
  m.command = command;
  m.argv = argv;
  m.timestamp = utc_timestamp_now();
  m.kernel_backend = kernels::backend_name();
  return m;
}

void finish_manifest(RunManifest& m, const fs::path& out_dir,
                     const std::vector<std::string>& artifacts) {
  for (const auto& name : artifacts) {
    m.outputs[name] = fingerprint_file((out_dir / name).string());
  }
  write_manifest_file((out_dir / "manifest.json").string(), m);
}

fs::path ensure_out_dir(const std::string& out) {
  fs::path dir(out);
  fs::create_directories(dir);
  return dir;
}

std::vector<RawRecord> read_ndjson_records(const std::string& path) {
  return parse_records_file(path, RecordFormat::ndjson, ParseMode::strict).records;
}

SplitRatios parse_split(const std::string& s) {
  SplitRatios r;
  if (s.empty()) return r;
  if (std::sscanf(s.c_str(), "%lf,%lf,%lf", &r.train, &r.val, &r.test) != 3) {
    throw std::runtime_error("--split expects three comma-separated ratios");
  }
  r.validate();
  return r;
}

// ---------------------------------------------------------------------
// subcommand bodies
// ---------------------------------------------------------------------

struct SynthArgs {
  SynthConfig config;
  std::string out;
};

int run_synth(const SynthArgs& a, const std::vector<std::string>& argv) {
  auto dir = ensure_out_dir(a.out);
  auto records = generate_synthetic_corpus(a.config);
  write_records_ndjson_file((dir / "records.ndjson").string(), records);

  RunManifest m = start_manifest("synth", argv);
  m.seeds["synth"] = a.config.seed;
  finish_manifest(m, dir, {"records.ndjson"});
  std::cout << "wrote " << records.size() << " records to " << (dir / "records.ndjson").string()
            << "\n";
  return 0;
}

struct IngestArgs {
  std::string input, format = "csv", mode = "lenient", out;
};

int run_ingest(const IngestArgs& a, const std::vector<std::string>& argv) {
  auto dir = ensure_out_dir(a.out);
  ParseResult parsed =
      parse_records_file(a.input, record_format_from_string(a.format), parse_mode_from_string(a.mode));
  write_records_ndjson_file((dir / "records.ndjson").string(), parsed.records);
  write_text_file((dir / "parse_report.json").string(), parse_report_to_json(parsed.report));

  RunManifest m = start_manifest("ingest", argv);
  m.input_fingerprints[a.input] = fingerprint_file(a.input);
  finish_manifest(m, dir, {"records.ndjson", "parse_report.json"});
  std::cout << "accepted " << parsed.report.rows_accepted << "/" << parsed.report.rows_read
            << " rows\n";
  return 0;
}

struct ProcessArgs {
  std::string input, config, out;
};

int run_process(const ProcessArgs& a, const std::vector<std::string>& argv) {
  auto dir = ensure_out_dir(a.out);
  PipelineConfig pc = a.config.empty() ? PipelineConfig{} : PipelineConfig::from_json_file(a.config);
  auto records = read_ndjson_records(a.input);
  PipelineResult result = run_pipeline(records, pc);
  write_result_ndjson_file((dir / "grids.ndjson").string(), result);
  write_text_file((dir / "pipeline_stats.json").string(), result.stats.to_json(pc));

  RunManifest m = start_manifest("process", argv);
  m.input_fingerprints[a.input] = fingerprint_file(a.input);
  if (!a.config.empty()) m.config_hashes[a.config] = fingerprint_file(a.config);
  finish_manifest(m, dir, {"grids.ndjson", "pipeline_stats.json"});
  std::cout << result.stats.users_out << " users, " << result.stats.user_days_out
            << " user-days after cleaning\n";
  return 0;
}

struct BuildArgs {
  std::string input, out;
  int window_days = 3;
  int stride = 0;
  std::string features = "steps";
  std::string holidays;
  std::string split;
  std::string pipeline_config;
};

int run_build(const BuildArgs& a, const std::vector<std::string>& argv) {
  auto dir = ensure_out_dir(a.out);
  GridsDocument grids = read_grids_ndjson_file(a.input);

  WindowConfig wc;
  wc.window_days = a.window_days;
  wc.granularity = grids.granularity;
  wc.stride_days = a.stride;
  FeatureConfig fc = feature_preset(a.features);
  if (!a.holidays.empty()) {
    std::ifstream in(a.holidays);
    if (!in) throw std::runtime_error("cannot open holidays file: " + a.holidays);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto d = Date::parse(line);
      if (!d) throw std::runtime_error("invalid holiday date: " + line);
      fc.holiday_dates.insert(*d);
    }
  }

  WindowedDataset ds = grids.granularity == Granularity::hourly
                           ? build_windows(grids.hourly, wc, fc)
                           : build_windows(grids.daily, wc, fc);
  DatasetBundle bundle;
  bundle.splits = chronological_split(ds, parse_split(a.split));
  if (bundle.splits.train.examples.empty()) {
    throw std::runtime_error("training split is empty; not enough windows");
  }
  bundle.scaler = fit_scaler(bundle.splits.train);
  if (!a.pipeline_config.empty()) {
    bundle.pipeline_config_json = PipelineConfig::from_json_file(a.pipeline_config).to_json();
  }
  save_dataset((dir / "dataset.bin").string(), (dir / "dataset.json").string(), bundle);

  RunManifest m = start_manifest("build", argv);
  m.input_fingerprints[a.input] = fingerprint_file(a.input);
  if (!a.pipeline_config.empty()) {
    m.config_hashes[a.pipeline_config] = fingerprint_file(a.pipeline_config);
  }
  finish_manifest(m, dir, {"dataset.bin", "dataset.json"});
  std::cout << "windows: train " << bundle.splits.train.size() << ", val "
            << bundle.splits.val.size() << ", test " << bundle.splits.test.size() << "\n";
  return 0;
}

struct TrainArgs {
  std::string dataset, model, config, out;
  bool grid = false;
  int cv_k = 5;
  uint64_t seed = 0;
  bool seed_set = false;
};

int run_train(const TrainArgs& a, const std::vector<std::string>& argv) {
  auto dir = ensure_out_dir(a.out);
  ModelFamily family = family_from_string(a.model);
  DatasetBundle bundle = load_dataset(a.dataset);
  const Scaler& scaler = bundle.scaler;
  WindowedDataset train_scaled = apply_scaler(scaler, bundle.splits.train);
  WindowedDataset val_scaled = apply_scaler(scaler, bundle.splits.val);

  std::string config_json = a.config.empty() ? default_config(family) : read_text_file(a.config);
  if (a.seed_set) {
    auto j = nlohmann::json::parse(config_json);
    j["seed"] = a.seed;
    if (j.contains("train")) j["train"]["seed"] = a.seed;
    config_json = j.dump();
  }

  RunManifest m = start_manifest("train", argv);
  m.input_fingerprints[a.dataset] = fingerprint_file(a.dataset);
  if (!a.config.empty()) m.config_hashes[a.config] = fingerprint_file(a.config);
  if (a.seed_set) m.seeds["train"] = a.seed;

  std::vector<std::string> artifacts{"model.json", "train_log.json"};
  std::string grid_log;
  if (a.grid) {
    GridSearchResult gs = grid_search(family, default_grid(family), train_scaled, scaler, a.cv_k);
    config_json = gs.best_config_json;
    nlohmann::ordered_json gj;
    gj["best_index"] = gs.best_index;
    gj["best_config"] = nlohmann::ordered_json::parse(gs.best_config_json);
    auto& pts = gj["points"] = nlohmann::ordered_json::array();
    for (const auto& p : gs.points) {
      nlohmann::ordered_json pj;
      pj["config"] = nlohmann::ordered_json::parse(p.config_json);
      if (p.failed) {
        pj["error"] = p.error;
      } else {
        pj["mean_val_mae"] = p.mean_val_mae;
      }
      pts.push_back(std::move(pj));
    }
    grid_log = gj.dump(2);
    artifacts.push_back("grid_results.json");
  }

  FitOutput fit = fit_family(family, config_json, train_scaled, val_scaled, scaler,
                             bundle.pipeline_config_json);
  save_model((dir / "model.json").string(), fit.doc);
  write_text_file((dir / "train_log.json").string(), train_log_to_json(fit.log));
  if (a.grid) write_text_file((dir / "grid_results.json").string(), grid_log);

  finish_manifest(m, dir, artifacts);
  std::cout << "trained " << family_label(family) << " -> " << (dir / "model.json").string()
            << "\n";
  return 0;
}

struct EvaluateArgs {
  std::string dataset, out;
  std::vector<std::string> models;
  bool no_baseline = false;
};

int run_evaluate(const EvaluateArgs& a, const std::vector<std::string>& argv) {
  auto dir = ensure_out_dir(a.out);
  DatasetBundle bundle = load_dataset(a.dataset);
  const Scaler& scaler = bundle.scaler;
  WindowedDataset train_scaled = apply_scaler(scaler, bundle.splits.train);
  WindowedDataset test_scaled = apply_scaler(scaler, bundle.splits.test);

  RunManifest m = start_manifest("evaluate", argv);
  m.input_fingerprints[a.dataset] = fingerprint_file(a.dataset);

  std::vector<ModelDocument> docs;
  std::vector<std::unique_ptr<Regressor>> regs;
  std::vector<NamedModel> named;

  if (!a.no_baseline) {
    FitOutput base = fit_family(ModelFamily::baseline, "", train_scaled, WindowedDataset{}, scaler,
                                bundle.pipeline_config_json);
    docs.push_back(base.doc);
  }
  for (const auto& path : a.models) {
    docs.push_back(load_model(path));
    m.input_fingerprints[path] = fingerprint_file(path);
  }
  for (const auto& d : docs) {
    regs.push_back(instantiate(d));
    named.push_back(NamedModel{family_label(d.family), to_string(d.family), d.config_json,
                               regs.back().get()});
  }

  EvalReport report = benchmark(named, train_scaled, test_scaled, scaler,
                                fingerprint_file(a.dataset));
  write_text_file((dir / "report.json").string(), report.to_json());
  write_text_file((dir / "report.txt").string(), report.to_text());

  finish_manifest(m, dir, {"report.json", "report.txt"});
  std::cout << report.to_text();
  return 0;
}

struct SweepArgs {
  std::string input, config, spec, out;
};

int run_sweep(const SweepArgs& a, const std::vector<std::string>& argv) {
  auto dir = ensure_out_dir(a.out);
  auto records = read_ndjson_records(a.input);
  PipelineConfig base =
      a.config.empty() ? PipelineConfig{} : PipelineConfig::from_json_file(a.config);
  SweepSpec spec = a.spec.empty() ? SweepSpec{} : SweepSpec::from_json(read_text_file(a.spec));

  SweepReport report = config_sweep(records, base, spec);
  write_text_file((dir / "sweep.csv").string(), report.to_csv());
  write_text_file((dir / "sweep.json").string(), report.to_json());

  RunManifest m = start_manifest("sweep", argv);
  m.input_fingerprints[a.input] = fingerprint_file(a.input);
  if (!a.config.empty()) m.config_hashes[a.config] = fingerprint_file(a.config);
  if (!a.spec.empty()) m.config_hashes[a.spec] = fingerprint_file(a.spec);
  finish_manifest(m, dir, {"sweep.csv", "sweep.json"});
  std::cout << report.to_csv();
  return 0;
}

struct GoalArgs {
  std::string model, history, user, out;
  double uplift = 0.10;
  int64_t floor_steps = -1;
  int64_t ceiling_steps = -1;
};

int run_goal(const GoalArgs& a, const std::vector<std::string>& argv) {
  auto dir = ensure_out_dir(a.out);
  ModelDocument doc = load_model(a.model);
  auto history = read_ndjson_records(a.history);

  GoalConfig gc;
  gc.uplift = a.uplift;
  if (a.floor_steps >= 0) gc.floor_steps = a.floor_steps;
  if (a.ceiling_steps >= 0) gc.ceiling_steps = a.ceiling_steps;

  const double predicted = predict_next_day(doc, history, a.user);
  const int64_t goal = adaptive_goal(predicted, gc);

  nlohmann::ordered_json j;
  j["predicted_steps"] = predicted;
  j["uplift"] = gc.uplift;
  if (gc.floor_steps) j["floor"] = *gc.floor_steps;
  if (gc.ceiling_steps) j["ceiling"] = *gc.ceiling_steps;
  j["goal"] = goal;
  write_text_file((dir / "goal.json").string(), j.dump(2));

  RunManifest m = start_manifest("goal", argv);
  m.input_fingerprints[a.model] = fingerprint_file(a.model);
  m.input_fingerprints[a.history] = fingerprint_file(a.history);
  finish_manifest(m, dir, {"goal.json"});
  std::cout << goal << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stepcast: step-count prediction and adaptive goal toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  std::vector<std::string> raw_args(argv + 1, argv + argc);

  SynthArgs synth_args;
  auto* synth = app.add_subcommand("synth", "generate a deterministic synthetic corpus");
  synth->add_option("--users", synth_args.config.n_users, "number of users");
  synth->add_option("--days", synth_args.config.n_days, "days per user");
  synth->add_option("--seed", synth_args.config.seed, "corpus seed");
  synth->add_option("--duplicate-rate", synth_args.config.duplicate_rate, "duplicate record rate");
  synth->add_option("--outlier-day-rate", synth_args.config.outlier_day_rate, "outlier day rate");
  synth->add_option("--nowear-day-rate", synth_args.config.nowear_day_rate, "no-wear day rate");
  synth->add_option("--coarse-record-rate", synth_args.config.coarse_record_rate,
                    "coarse multi-hour record rate");
  synth->add_option("--out", synth_args.out, "output directory")->required();

  IngestArgs ingest_args;
  auto* ingest = app.add_subcommand("ingest", "parse and validate raw records");
  ingest->add_option("--input", ingest_args.input, "input file")->required();
  ingest->add_option("--format", ingest_args.format, "csv|ndjson");
  ingest->add_option("--mode", ingest_args.mode, "strict|lenient");
  ingest->add_option("--out", ingest_args.out, "output directory")->required();

  ProcessArgs process_args;
  auto* process = app.add_subcommand("process", "run the cleaning pipeline");
  process->add_option("--input", process_args.input, "records.ndjson")->required();
  process->add_option("--config", process_args.config, "pipeline config JSON");
  process->add_option("--out", process_args.out, "output directory")->required();

  BuildArgs build_args;
  auto* build = app.add_subcommand("build", "window the grids into a supervised dataset");
  build->add_option("--input", build_args.input, "grids.ndjson")->required();
  build->add_option("--window-days", build_args.window_days, "window size W (days)");
  build->add_option("--stride", build_args.stride, "window stride in days (0 = default)");
  build->add_option("--features", build_args.features, "steps|date|cyclic|all");
  build->add_option("--holidays", build_args.holidays, "file of holiday dates, one per line");
  build->add_option("--split", build_args.split, "train,val,test ratios (default 0.7,0.15,0.15)");
  build->add_option("--pipeline-config", build_args.pipeline_config,
                    "pipeline config to embed for inference");
  build->add_option("--out", build_args.out, "output directory")->required();

  TrainArgs train_args;
  auto* train = app.add_subcommand("train", "fit a model on a built dataset");
  train->add_option("--dataset", train_args.dataset, "dataset.bin")->required();
  train->add_option("--model", train_args.model, "ridge|tree|gb|mlp|cnn|lstm")->required();
  train->add_option("--config", train_args.config, "model config JSON");
  train->add_flag("--grid", train_args.grid, "grid search with time-series CV");
  train->add_option("--cv-k", train_args.cv_k, "CV folds for --grid");
  auto* seed_opt = train->add_option("--seed", train_args.seed, "override model/train seed");
  train->add_option("--out", train_args.out, "output directory")->required();

  EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "benchmark trained models");
  evaluate->add_option("--dataset", eval_args.dataset, "dataset.bin")->required();
  evaluate->add_option("--models", eval_args.models, "model.json files")->required()
      ->delimiter(',');
  evaluate->add_flag("--no-baseline", eval_args.no_baseline, "omit the train-mean baseline row");
  evaluate->add_option("--out", eval_args.out, "output directory")->required();

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "granularity/window/feature/outlier sweep");
  sweep->add_option("--input", sweep_args.input, "records.ndjson")->required();
  sweep->add_option("--config", sweep_args.config, "base pipeline config JSON");
  sweep->add_option("--spec", sweep_args.spec, "sweep spec JSON");
  sweep->add_option("--out", sweep_args.out, "output directory")->required();

  GoalArgs goal_args;
  auto* goal = app.add_subcommand("goal", "adaptive next-day step goal for one user");
  goal->add_option("--model", goal_args.model, "model.json")->required();
  goal->add_option("--history", goal_args.history, "recent records.ndjson")->required();
  goal->add_option("--user", goal_args.user, "user id (default: the only user present)");
  goal->add_option("--uplift", goal_args.uplift, "goal uplift fraction (default 0.10)");
  goal->add_option("--floor", goal_args.floor_steps, "optional goal floor in steps");
  goal->add_option("--ceiling", goal_args.ceiling_steps, "optional goal ceiling in steps");
  goal->add_option("--out", goal_args.out, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    train_args.seed_set = seed_opt->count() > 0;
    if (synth->parsed()) return run_synth(synth_args, raw_args);
    if (ingest->parsed()) return run_ingest(ingest_args, raw_args);
    if (process->parsed()) return run_process(process_args, raw_args);
    if (build->parsed()) return run_build(build_args, raw_args);
    if (train->parsed()) return run_train(train_args, raw_args);
    if (evaluate->parsed()) return run_evaluate(eval_args, raw_args);
    if (sweep->parsed()) return run_sweep(sweep_args, raw_args);
    if (goal->parsed()) return run_goal(goal_args, raw_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
