#include "stepcast/models/model_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "stepcast/kernels.hpp"
#include "stepcast/version.hpp"

namespace stepcast {

using ordered_json = nlohmann::ordered_json;

ModelFamily family_from_string(const std::string& s) {
  if (s == "baseline") return ModelFamily::baseline;
  if (s == "ridge") return ModelFamily::ridge;
  if (s == "tree") return ModelFamily::tree;
  if (s == "gb") return ModelFamily::gb;
  if (s == "mlp") return ModelFamily::mlp;
  if (s == "cnn") return ModelFamily::cnn;
  if (s == "lstm") return ModelFamily::lstm;
  throw std::invalid_argument("unknown model family: " + s);
}

const char* to_string(ModelFamily f) {
  switch (f) {
    case ModelFamily::baseline: return "baseline";
    case ModelFamily::ridge: return "ridge";
    case ModelFamily::tree: return "tree";
    case ModelFamily::gb: return "gb";
    case ModelFamily::mlp: return "mlp";
    case ModelFamily::cnn: return "cnn";
    case ModelFamily::lstm: return "lstm";
  }
  return "?";
}

const char* family_label(ModelFamily f) {
  switch (f) {
    case ModelFamily::baseline: return "Baseline (train mean)";
    case ModelFamily::ridge: return "Ridge";
    case ModelFamily::tree: return "Decision Tree";
    case ModelFamily::gb: return "Gradient Boosting";
    case ModelFamily::mlp: return "MLP";
    case ModelFamily::cnn: return "CNN";
    case ModelFamily::lstm: return "RNN (LSTM)";
  }
  return "?";
}

// ----------------------------------------------------------------------
// family configs / params
// ----------------------------------------------------------------------

std::string ridge_config_to_json(const RidgeConfig& c) {
  return ordered_json{{"lambda", c.lambda}, {"fit_intercept", c.fit_intercept}}.dump();
}

RidgeConfig ridge_config_from_json(const std::string& text) {
  RidgeConfig c;
  if (text.empty()) return c;
  auto j = nlohmann::json::parse(text);
  if (j.contains("lambda")) c.lambda = j["lambda"].get<double>();
  if (j.contains("fit_intercept")) c.fit_intercept = j["fit_intercept"].get<bool>();
  c.validate();
  return c;
}

std::string linear_model_to_json(const LinearModel& m) {
  return ordered_json{{"weights", m.weights}, {"intercept", m.intercept}}.dump();
}

LinearModel linear_model_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  LinearModel m;
  m.weights = j.at("weights").get<std::vector<double>>();
  m.intercept = j.at("intercept").get<double>();
  return m;
}

std::string tree_config_to_json(const TreeConfig& c) {
  return ordered_json{{"max_depth", c.max_depth},
                      {"min_samples_split", c.min_samples_split},
                      {"min_samples_leaf", c.min_samples_leaf}}
      .dump();
}

TreeConfig tree_config_from_json(const std::string& text) {
  TreeConfig c;
  if (text.empty()) return c;
  auto j = nlohmann::json::parse(text);
  if (j.contains("max_depth")) {
    c.max_depth = j["max_depth"].is_null() ? -1 : j["max_depth"].get<int>();
  }
  if (j.contains("min_samples_split")) c.min_samples_split = j["min_samples_split"].get<int>();
  if (j.contains("min_samples_leaf")) c.min_samples_leaf = j["min_samples_leaf"].get<int>();
  c.validate();
  return c;
}

std::string tree_model_to_json(const TreeModel& m) {
  ordered_json nodes = ordered_json::array();
  for (const auto& n : m.nodes) {
    ordered_json nj;
    nj["leaf"] = n.is_leaf;
    if (n.is_leaf) {
      nj["value"] = n.value;
    } else {
      nj["feature"] = n.feature;
      nj["threshold"] = n.threshold;
      nj["left"] = n.left;
      nj["right"] = n.right;
    }
    nj["n"] = n.n_samples;
    nodes.push_back(std::move(nj));
  }
  return ordered_json{{"nodes", nodes}}.dump();
}

TreeModel tree_model_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  TreeModel m;
  for (const auto& nj : j.at("nodes")) {
    TreeNode n;
    n.is_leaf = nj.at("leaf").get<bool>();
    if (n.is_leaf) {
      n.value = nj.at("value").get<double>();
    } else {
      n.feature = nj.at("feature").get<int>();
      n.threshold = nj.at("threshold").get<double>();
      n.left = nj.at("left").get<int>();
      n.right = nj.at("right").get<int>();
    }
    n.n_samples = nj.at("n").get<int64_t>();
    m.nodes.push_back(n);
  }
  if (m.nodes.empty()) throw std::runtime_error("tree model has no nodes");
  return m;
}

std::string gb_config_to_json(const GBConfig& c) {
  ordered_json j;
  j["n_stages"] = c.n_stages;
  j["learning_rate"] = c.learning_rate;
  j["subsample"] = c.subsample;
  j["tree"] = ordered_json::parse(tree_config_to_json(c.tree));
  j["seed"] = c.seed;
  return j.dump();
}

GBConfig gb_config_from_json(const std::string& text) {
  GBConfig c;
  if (text.empty()) return c;
  auto j = nlohmann::json::parse(text);
  if (j.contains("n_stages")) c.n_stages = j["n_stages"].get<int>();
  if (j.contains("learning_rate")) c.learning_rate = j["learning_rate"].get<double>();
  if (j.contains("subsample")) c.subsample = j["subsample"].get<double>();
  if (j.contains("tree")) c.tree = tree_config_from_json(j["tree"].dump());
  if (j.contains("seed")) c.seed = j["seed"].get<uint64_t>();
  c.validate();
  return c;
}

std::string gb_model_to_json(const GBModel& m) {
  ordered_json j;
  j["init"] = m.init;
  j["learning_rate"] = m.learning_rate;
  ordered_json stages = ordered_json::array();
  for (const auto& t : m.stages) {
    stages.push_back(ordered_json::parse(tree_model_to_json(t)));
  }
  j["stages"] = stages;
  j["train_mse_per_stage"] = m.train_mse_per_stage;
  return j.dump();
}

GBModel gb_model_from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  GBModel m;
  m.init = j.at("init").get<double>();
  m.learning_rate = j.at("learning_rate").get<double>();
  for (const auto& sj : j.at("stages")) m.stages.push_back(tree_model_from_json(sj.dump()));
  if (j.contains("train_mse_per_stage")) {
    m.train_mse_per_stage = j["train_mse_per_stage"].get<std::vector<double>>();
  }
  return m;
}

std::string net_config_to_json(const NetConfig& c) {
  ordered_json j;
  j["arch"] = to_string(c.arch);
  j["hidden"] = c.hidden;
  j["lstm_layers"] = c.lstm_layers;
  j["lstm_hidden"] = c.lstm_hidden;
  j["conv_channels"] = c.conv_channels;
  j["kernel_size"] = c.kernel_size;
  j["conv_stride"] = c.conv_stride;
  j["pool"] = to_string(c.pool);
  j["pool_size"] = c.pool_size;
  j["pool_stride"] = c.pool_stride;
  j["dense"] = c.dense;
  j["dropout"] = c.dropout;
  j["seed"] = c.seed;
  return j.dump();
}

NetConfig net_config_from_json(const std::string& text) {
  NetConfig c;
  if (text.empty()) return c;
  auto j = nlohmann::json::parse(text);
  if (j.contains("arch")) c.arch = arch_from_string(j["arch"].get<std::string>());
  if (j.contains("hidden")) c.hidden = j["hidden"].get<std::vector<int>>();
  if (j.contains("lstm_layers")) c.lstm_layers = j["lstm_layers"].get<int>();
  if (j.contains("lstm_hidden")) c.lstm_hidden = j["lstm_hidden"].get<int>();
  if (j.contains("conv_channels")) c.conv_channels = j["conv_channels"].get<std::vector<int>>();
  if (j.contains("kernel_size")) c.kernel_size = j["kernel_size"].get<int>();
  if (j.contains("conv_stride")) c.conv_stride = j["conv_stride"].get<int>();
  if (j.contains("pool")) c.pool = pool_from_string(j["pool"].get<std::string>());
  if (j.contains("pool_size")) c.pool_size = j["pool_size"].get<int>();
  if (j.contains("pool_stride")) c.pool_stride = j["pool_stride"].get<int>();
  if (j.contains("dense")) c.dense = j["dense"].get<std::vector<int>>();
  if (j.contains("dropout")) c.dropout = j["dropout"].get<double>();
  if (j.contains("seed")) c.seed = j["seed"].get<uint64_t>();
  return c;
}

std::string net_params_to_json(const Net& net) {
  ordered_json j;
  j["input"] = {{"slots", net.input.slots}, {"channels", net.input.channels}};
  ordered_json tensors = ordered_json::array();
  for (const auto& p : net.params) {
    tensors.push_back(ordered_json{{"name", p.name}, {"shape", p.shape}, {"values", p.v}});
  }
  j["tensors"] = tensors;
  return j.dump();
}

Net net_from_json(const NetConfig& config, const InputShape& input,
                  const std::string& params_json) {
  auto j = nlohmann::json::parse(params_json);
  Net net = net_init(config, input);
  const auto& tensors = j.at("tensors");
  if (tensors.size() != net.params.size()) {
    throw std::runtime_error("net parameter list does not match architecture");
  }
  for (size_t i = 0; i < net.params.size(); ++i) {
    const auto& tj = tensors[i];
    auto values = tj.at("values").get<std::vector<double>>();
    if (values.size() != net.params[i].v.size()) {
      throw std::runtime_error("tensor size mismatch for " + net.params[i].name);
    }
    net.params[i].v = std::move(values);
  }
  return net;
}

std::string train_config_to_json(const TrainConfig& c) {
  ordered_json j;
  j["learning_rate"] = c.learning_rate;
  j["batch_size"] = c.batch_size;
  j["max_epochs"] = c.max_epochs;
  j["patience"] = c.patience;
  j["seed"] = c.seed;
  j["adam_beta1"] = c.adam_beta1;
  j["adam_beta2"] = c.adam_beta2;
  j["adam_eps"] = c.adam_eps;
  return j.dump();
}

TrainConfig train_config_from_json(const std::string& text) {
  TrainConfig c;
  if (text.empty()) return c;
  auto j = nlohmann::json::parse(text);
  if (j.contains("learning_rate")) c.learning_rate = j["learning_rate"].get<double>();
  if (j.contains("batch_size")) c.batch_size = j["batch_size"].get<int>();
  if (j.contains("max_epochs")) c.max_epochs = j["max_epochs"].get<int>();
  if (j.contains("patience")) c.patience = j["patience"].get<int>();
  if (j.contains("seed")) c.seed = j["seed"].get<uint64_t>();
  if (j.contains("adam_beta1")) c.adam_beta1 = j["adam_beta1"].get<double>();
  if (j.contains("adam_beta2")) c.adam_beta2 = j["adam_beta2"].get<double>();
  if (j.contains("adam_eps")) c.adam_eps = j["adam_eps"].get<double>();
  c.validate();
  return c;
}

std::string train_log_to_json(const TrainLog& log) {
  ordered_json j;
  j["train_loss"] = log.train_loss;
  j["val_mae"] = log.val_mae;
  j["best_epoch"] = log.best_epoch;
  return j.dump(2);
}

// ----------------------------------------------------------------------
// model document
// ----------------------------------------------------------------------

std::string ModelDocument::to_json() const {
  ordered_json j;
  j["schema_version"] = schema_version;
  j["tool_version"] = kToolVersion;
  j["family"] = to_string(family);
  j["config"] = ordered_json::parse(config_json.empty() ? "{}" : config_json);
  j["params"] = ordered_json::parse(params_json.empty() ? "{}" : params_json);
  j["scaler"] = ordered_json::parse(scaler_to_json(scaler));
  j["feature_names"] = feature_names;
  j["dataset_meta"] = ordered_json::parse(dataset_meta_to_json(dataset_meta));
  if (!pipeline_config_json.empty()) {
    j["pipeline_config"] = ordered_json::parse(pipeline_config_json);
  }
  return j.dump(2);
}

ModelDocument ModelDocument::from_json(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  ModelDocument d;
  d.schema_version = j.at("schema_version").get<int>();
  if (d.schema_version != kSchemaVersion) {
    throw std::runtime_error("unsupported model schema version " +
                             std::to_string(d.schema_version));
  }
  d.family = family_from_string(j.at("family").get<std::string>());
  d.config_json = j.at("config").dump();
  d.params_json = j.at("params").dump();
  d.scaler = scaler_from_json(j.at("scaler").dump());
  d.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  d.dataset_meta = dataset_meta_from_json(j.at("dataset_meta").dump());
  if (j.contains("pipeline_config")) d.pipeline_config_json = j["pipeline_config"].dump();
  return d;
}

void save_model(const std::string& path, const ModelDocument& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  out << doc.to_json() << '\n';
  out.flush();
  if (!out) throw std::runtime_error("I/O error writing " + path);
}

ModelDocument load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ModelDocument::from_json(ss.str());
}

// ----------------------------------------------------------------------
// regressor wrappers
// ----------------------------------------------------------------------

namespace {

class BaselineRegressor final : public Regressor {
 public:
  explicit BaselineRegressor(double mean) : mean_(mean) {}
  ModelFamily family() const override { return ModelFamily::baseline; }
  std::vector<double> predict(const Matrix& X) const override {
    return std::vector<double>(X.rows, mean_);
  }

 private:
  double mean_;
};

class RidgeRegressor final : public Regressor {
 public:
  explicit RidgeRegressor(LinearModel m) : model_(std::move(m)) {}
  ModelFamily family() const override { return ModelFamily::ridge; }
  std::vector<double> predict(const Matrix& X) const override { return model_.predict(X); }

 private:
  LinearModel model_;
};

class TreeRegressor final : public Regressor {
 public:
  explicit TreeRegressor(TreeModel m) : model_(std::move(m)) {}
  ModelFamily family() const override { return ModelFamily::tree; }
  std::vector<double> predict(const Matrix& X) const override { return model_.predict(X); }

 private:
  TreeModel model_;
};

class GbRegressor final : public Regressor {
 public:
  explicit GbRegressor(GBModel m) : model_(std::move(m)) {}
  ModelFamily family() const override { return ModelFamily::gb; }
  std::vector<double> predict(const Matrix& X) const override { return model_.predict(X); }

 private:
  GBModel model_;
};

class NetRegressor final : public Regressor {
 public:
  NetRegressor(Net net, ModelFamily family) : net_(std::move(net)), family_(family) {}
  ModelFamily family() const override { return family_; }
  std::vector<double> predict(const Matrix& X) const override { return net_predict(net_, X); }

 private:
  Net net_;
  ModelFamily family_;
};

}  // namespace

std::unique_ptr<Regressor> instantiate(const ModelDocument& doc) {
  switch (doc.family) {
    case ModelFamily::baseline: {
      auto j = nlohmann::json::parse(doc.params_json);
      return std::make_unique<BaselineRegressor>(j.at("mean").get<double>());
    }
    case ModelFamily::ridge:
      return std::make_unique<RidgeRegressor>(linear_model_from_json(doc.params_json));
    case ModelFamily::tree:
      return std::make_unique<TreeRegressor>(tree_model_from_json(doc.params_json));
    case ModelFamily::gb:
      return std::make_unique<GbRegressor>(gb_model_from_json(doc.params_json));
    case ModelFamily::mlp:
    case ModelFamily::cnn:
    case ModelFamily::lstm: {
      NetConfig config = net_config_from_json(doc.config_json);
      InputShape input{doc.dataset_meta.slots, doc.dataset_meta.channels};
      return std::make_unique<NetRegressor>(net_from_json(config, input, doc.params_json),
                                            doc.family);
    }
  }
  throw std::logic_error("unreachable");
}

FitOutput fit_family(ModelFamily family, const std::string& config_json,
                     const WindowedDataset& train_scaled, const WindowedDataset& val_scaled,
                     const Scaler& scaler, const std::string& pipeline_config_json) {
  FitOutput out;
  ModelDocument& doc = out.doc;
  doc.family = family;
  doc.scaler = scaler;
  doc.feature_names = train_scaled.feature_names;
  doc.dataset_meta = train_scaled.meta;
  doc.pipeline_config_json = pipeline_config_json;

  const Matrix X = feature_matrix(train_scaled);
  const std::vector<double> y = target_vector(train_scaled);

  switch (family) {
    case ModelFamily::baseline: {
      if (y.empty()) throw std::invalid_argument("fit: empty training set");
      const double mean = kernels::sum(y.data(), y.size()) / static_cast<double>(y.size());
      doc.config_json = "{}";
      doc.params_json = ordered_json{{"mean", mean}}.dump();
      break;
    }
    case ModelFamily::ridge: {
      RidgeConfig c = ridge_config_from_json(config_json);
      LinearModel m = ridge_fit(X, y, c);
      doc.config_json = ridge_config_to_json(c);
      doc.params_json = linear_model_to_json(m);
      break;
    }
    case ModelFamily::tree: {
      TreeConfig c = tree_config_from_json(config_json);
      TreeModel m = tree_fit(X, y, c);
      doc.config_json = tree_config_to_json(c);
      doc.params_json = tree_model_to_json(m);
      break;
    }
    case ModelFamily::gb: {
      GBConfig c = gb_config_from_json(config_json);
      GBModel m = gbr_fit(X, y, c);
      doc.config_json = gb_config_to_json(c);
      doc.params_json = gb_model_to_json(m);
      break;
    }
    case ModelFamily::mlp:
    case ModelFamily::cnn:
    case ModelFamily::lstm: {
      // Architecture keys live at the top level; training keys under
      // "train" (or flat, for hand-written configs without a sub-object).
      NetConfig nc = net_config_from_json(config_json);
      nc.arch = family == ModelFamily::mlp ? Arch::mlp
                : family == ModelFamily::cnn ? Arch::cnn1d
                                             : Arch::lstm;
      std::string train_json = config_json;
      if (!config_json.empty()) {
        auto j = nlohmann::json::parse(config_json);
        if (j.contains("train")) train_json = j["train"].dump();
      }
      TrainConfig tc = train_config_from_json(train_json);
      NetFitResult fit = net_fit(nc, tc, train_scaled, val_scaled, scaler);
      out.log = fit.log;
      ordered_json cj = ordered_json::parse(net_config_to_json(nc));
      cj["train"] = ordered_json::parse(train_config_to_json(tc));
      doc.config_json = cj.dump();
      doc.params_json = net_params_to_json(fit.net);
      break;
    }
  }
  return out;
}

}  // namespace stepcast
