/**
 * Copyright 2026 The gpuperf Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "gpuperf/nn/serialize.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace gpuperf::nn {
namespace {

using nlohmann::json;

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw std::invalid_argument(std::string("model file: missing field '") + key + "'");
  }
  return j.at(key);
}

std::vector<double> doubles(const json& j, const char* what) {
  if (!j.is_array()) throw std::invalid_argument(std::string("model file: ") + what + " must be an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw std::invalid_argument(std::string("model file: ") + what + " must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, std::size_t rows, std::size_t cols) {
  if (!j.is_array() || j.size() != rows) throw std::invalid_argument("model file: weight row count mismatch");
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = doubles(j[r], "weight row");
    if (row.size() != cols) throw std::invalid_argument("model file: weight column count mismatch");
    std::copy(row.begin(), row.end(), m.row(r).begin());
  }
  return m;
}

}  // namespace

json to_json(const Mlp& model) {
  json layers = json::array();
  for (const auto& d : model.dense()) {
    layers.push_back({{"weight", matrix_to_json(d.weight)}, {"bias", d.bias}});
  }
  json bn = json::array();
  for (const auto& b : model.batchnorm()) {
    bn.push_back({{"gamma", b.gamma},
                  {"beta", b.beta},
                  {"running_mean", b.running_mean},
                  {"running_var", b.running_var}});
  }
  return {{"format_version", kModelFormatVersion},
          {"layer_dims", model.layer_dims()},
          {"dropout_rate", model.dropout_rate()},
          {"layers", layers},
          {"batchnorm", bn}};
}

Mlp mlp_from_json(const json& j) {
  const int version = field(j, "format_version").get<int>();
  if (version != kModelFormatVersion) {
    throw std::invalid_argument("model file: unsupported format_version " + std::to_string(version));
  }
  std::vector<std::size_t> dims;
  for (const auto& d : field(j, "layer_dims")) {
    if (!d.is_number_integer() || d.get<long long>() <= 0) {
      throw std::invalid_argument("model file: layer_dims must be positive integers");
    }
    dims.push_back(d.get<std::size_t>());
  }
  if (dims.size() < 2) throw std::invalid_argument("model file: need at least two layer dims");
  const auto& layers = field(j, "layers");
  const auto& bn = field(j, "batchnorm");
  if (!layers.is_array() || layers.size() != dims.size() - 1) {
    throw std::invalid_argument("model file: layer count does not match layer_dims");
  }
  if (!bn.is_array() || bn.size() != dims.size() - 2) {
    throw std::invalid_argument("model file: batchnorm count does not match layer_dims");
  }
  std::vector<Dense> dense;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    dense.push_back(Dense{matrix_from_json(field(layers[l], "weight"), dims[l + 1], dims[l]),
                          doubles(field(layers[l], "bias"), "bias")});
  }
  std::vector<BatchNorm> norms;
  for (const auto& b : bn) {
    norms.push_back(BatchNorm{doubles(field(b, "gamma"), "gamma"), doubles(field(b, "beta"), "beta"),
                              doubles(field(b, "running_mean"), "running_mean"),
                              doubles(field(b, "running_var"), "running_var")});
  }
  Mlp m = Mlp::from_parts(std::move(dims), field(j, "dropout_rate").get<double>(), std::move(dense),
                          std::move(norms));
  if (!m.all_finite()) throw std::invalid_argument("model file: non-finite parameters");
  return m;
}

json to_json(const LossSpec& loss) {
  if (loss.kind == LossKind::Mape) return {{"mode", "mape"}};
  return {{"mode", "quantile"}, {"q", loss.q}};
}

LossSpec loss_from_json(const json& j) {
  const auto mode = field(j, "mode").get<std::string>();
  if (mode == "mape") return LossSpec::mape();
  if (mode == "quantile") return LossSpec::quantile(field(j, "q").get<double>());
  throw std::invalid_argument("model file: unknown loss mode '" + mode + "'");
}

json to_json(const TrainConfig& cfg) {
  return {{"learning_rate", cfg.learning_rate},
          {"weight_decay", cfg.weight_decay},
          {"batch_size", cfg.batch_size},
          {"max_epochs", cfg.max_epochs},
          {"patience", cfg.patience},
          {"validation_fraction", cfg.validation_fraction},
          {"loss", to_json(cfg.loss)},
          {"seed", cfg.seed},
          {"hidden", cfg.hidden},
          {"dropout", cfg.dropout}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.patience = j.value("patience", c.patience);
  c.validation_fraction = j.value("validation_fraction", c.validation_fraction);
  if (j.contains("loss")) c.loss = loss_from_json(j.at("loss"));
  c.seed = j.value("seed", c.seed);
  c.hidden = j.value("hidden", c.hidden);
  c.dropout = j.value("dropout", c.dropout);
  c.validate();
  return c;
}

}  // namespace gpuperf::nn
