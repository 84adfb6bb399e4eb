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

#pragma once

#include <cstdint>
#include <vector>

#include "gpuperf/nn/loss.hpp"
#include "gpuperf/nn/matrix.hpp"
#include "gpuperf/nn/mlp.hpp"

namespace gpuperf::nn {

struct TrainConfig {
  double learning_rate = 1e-3;
  double weight_decay = 0.01;
  std::size_t batch_size = 256;
  std::size_t max_epochs = 200;
  std::size_t patience = 20;
  double validation_fraction = 0.1;
  LossSpec loss = LossSpec::mape();
  std::uint64_t seed = 0;
  std::vector<std::size_t> hidden = {256, 128, 64};
  double dropout = 0.1;

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

struct TrainHistory {
  std::vector<double> train_loss;  // mean batch loss per epoch
  std::vector<double> val_loss;    // eval-mode loss per epoch
  std::size_t best_epoch = 0;      // 0-based
  double best_val_loss = 0.0;
  bool stopped_early = false;
};

/// Decoupled-weight-decay Adam (beta1 0.9, beta2 0.999, eps 1e-8).
class AdamW {
 public:
  AdamW(const Mlp& model, double lr, double weight_decay);
  void step(Mlp& model, const Gradients& grads);
  std::size_t steps() const { return t_; }

  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEps = 1e-8;

 private:
  double lr_;
  double wd_;
  std::size_t t_ = 0;
  Gradients m_;
  Gradients v_;
};

/// Fresh model with the configured topology, seeded from cfg.seed.
Mlp make_model(std::size_t input_dim, const TrainConfig& cfg);

/// Splits (x, y) with cfg.validation_fraction after a seeded shuffle, then
/// trains. The model is left at the best-validation snapshot.
TrainHistory train(Mlp& model, const Matrix& x, const std::vector<double>& y,
                   const TrainConfig& cfg);

/// Trains on an explicit split.
TrainHistory train(Mlp& model, const Matrix& x_train, const std::vector<double>& y_train,
                   const Matrix& x_val, const std::vector<double>& y_val, const TrainConfig& cfg);

}  // namespace gpuperf::nn
