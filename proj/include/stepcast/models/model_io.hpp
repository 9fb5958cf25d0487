#pragma once

#include <memory>
#include <string>
#include <vector>

#include "stepcast/dataset.hpp"
#include "stepcast/linalg.hpp"
#include "stepcast/models/gbr.hpp"
#include "stepcast/models/net.hpp"
#include "stepcast/models/ridge.hpp"
#include "stepcast/models/tree.hpp"

namespace stepcast {

enum class ModelFamily { baseline, ridge, tree, gb, mlp, cnn, lstm };

ModelFamily family_from_string(const std::string& s);
const char* to_string(ModelFamily f);
// Human-readable row label, Table-style ("Ridge", "RNN (LSTM)", ...).
const char* family_label(ModelFamily f);

// Uniform prediction surface over all fitted model families. Models
// operate on scaled features and emit scaled targets; callers invert
// through the document's scaler to recover raw step counts.
class Regressor {
 public:
  virtual ~Regressor() = default;
  virtual ModelFamily family() const = 0;
  virtual std::vector<double> predict(const Matrix& X) const = 0;
};

// Self-describing fitted-model document: family + config + parameters,
// plus everything needed to reproduce the input transform for inference
// (scaler, feature names, dataset meta, pipeline config). Round-trips
// exactly: a restored model reproduces predictions bit-for-bit.
struct ModelDocument {
  int schema_version = 1;
  ModelFamily family = ModelFamily::ridge;
  std::string config_json;     // family-specific config
  std::string params_json;     // family-specific parameters
  Scaler scaler;
  std::vector<std::string> feature_names;
  DatasetMeta dataset_meta;
  std::string pipeline_config_json;  // may be empty

  std::string to_json() const;
  static ModelDocument from_json(const std::string& text);
};

void save_model(const std::string& path, const ModelDocument& doc);
ModelDocument load_model(const std::string& path);

std::unique_ptr<Regressor> instantiate(const ModelDocument& doc);

// Family-specific (de)serialization helpers.
std::string ridge_config_to_json(const RidgeConfig&);
RidgeConfig ridge_config_from_json(const std::string&);
std::string linear_model_to_json(const LinearModel&);
LinearModel linear_model_from_json(const std::string&);

std::string tree_config_to_json(const TreeConfig&);
TreeConfig tree_config_from_json(const std::string&);
std::string tree_model_to_json(const TreeModel&);
TreeModel tree_model_from_json(const std::string&);

std::string gb_config_to_json(const GBConfig&);
GBConfig gb_config_from_json(const std::string&);
std::string gb_model_to_json(const GBModel&);
GBModel gb_model_from_json(const std::string&);

std::string net_config_to_json(const NetConfig&);
NetConfig net_config_from_json(const std::string&);
std::string net_params_to_json(const Net&);
Net net_from_json(const NetConfig& config, const InputShape& input, const std::string& params_json);

std::string train_config_to_json(const TrainConfig&);
TrainConfig train_config_from_json(const std::string&);
std::string train_log_to_json(const TrainLog&);

// Fits one model of the given family on the scaled training split.
// Neural families use the validation split for early stopping; classic
// families ignore it. config_json == "" means family defaults.
struct FitOutput {
  ModelDocument doc;
  TrainLog log;  // empty for classic families
};
FitOutput fit_family(ModelFamily family, const std::string& config_json,
                     const WindowedDataset& train_scaled, const WindowedDataset& val_scaled,
                     const Scaler& scaler, const std::string& pipeline_config_json);

}  // namespace stepcast
