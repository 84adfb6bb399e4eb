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

#include "gpuperf/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "gpuperf/common.hpp"

namespace gpuperf::nn {
namespace {

void check_targets(const Matrix& x, const std::vector<double>& y, const char* what) {
  if (x.rows() != y.size()) {
    throw std::invalid_argument(std::string("train: ") + what + " feature/target count mismatch");
  }
  for (double t : y) {
    if (!(t > 0.0 && t <= 1.0)) {
      throw std::invalid_argument(std::string("train: ") + what + " target outside (0, 1]");
    }
  }
}

std::vector<double> gather(const std::vector<double>& v, std::span<const std::size_t> idx) {
  std::vector<double> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(v[i]);
  return out;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("train: learning rate must be > 0");
  if (weight_decay < 0.0) throw std::invalid_argument("train: weight decay must be >= 0");
  if (batch_size == 0) throw std::invalid_argument("train: batch size must be > 0");
  if (max_epochs == 0) throw std::invalid_argument("train: max epochs must be > 0");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw std::invalid_argument("train: validation fraction must lie in (0, 1)");
  }
  if (loss.kind == LossKind::Quantile && !(loss.q > 0.0 && loss.q < 1.0)) {
    throw std::invalid_argument("train: quantile must lie in (0, 1)");
  }
  if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("train: dropout must be in [0, 1)");
}

AdamW::AdamW(const Mlp& model, double lr, double weight_decay)
    : lr_(lr), wd_(weight_decay), m_(model.zero_gradients()), v_(model.zero_gradients()) {}

void AdamW::step(Mlp& model, const Gradients& grads) {
  ++t_;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
  auto params = model.parameters();
  if (params.size() != grads.size()) throw std::invalid_argument("adamw: gradient layout mismatch");
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto p = params[k];
    const auto& g = grads[k];
    auto& m = m_[k];
    auto& v = v_[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      p[i] *= 1.0 - lr_ * wd_;
      m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * g[i];
      v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * g[i] * g[i];
      p[i] -= lr_ * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + kEps);
    }
  }
}

Mlp make_model(std::size_t input_dim, const TrainConfig& cfg) {
  return Mlp(input_dim, cfg.hidden, cfg.dropout, Rng::derive(cfg.seed, 0));
}

TrainHistory train(Mlp& model, const Matrix& x, const std::vector<double>& y,
                   const TrainConfig& cfg) {
  cfg.validate();
  check_targets(x, y, "dataset");
  if (x.rows() == 0) throw std::invalid_argument("train: empty dataset");
  const auto n_val = static_cast<std::size_t>(
      std::floor(cfg.validation_fraction * static_cast<double>(x.rows())));
  if (n_val == 0) throw std::invalid_argument("train: validation split is empty");
  if (n_val >= x.rows()) throw std::invalid_argument("train: training split is empty");

  std::vector<std::size_t> order(x.rows());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(Rng::derive(cfg.seed, 1));
  rng.shuffle(order);
  std::span<const std::size_t> all(order);
  const auto tr = all.first(order.size() - n_val);
  const auto va = all.last(n_val);
  return train(model, x.gather_rows(tr), gather(y, tr), x.gather_rows(va), gather(y, va), cfg);
}

TrainHistory train(Mlp& model, const Matrix& x_train, const std::vector<double>& y_train,
                   const Matrix& x_val, const std::vector<double>& y_val, const TrainConfig& cfg) {
  cfg.validate();
  check_targets(x_train, y_train, "training");
  check_targets(x_val, y_val, "validation");
  if (x_train.rows() == 0) throw std::invalid_argument("train: training split is empty");
  if (x_val.rows() == 0) throw std::invalid_argument("train: validation split is empty");

  Rng rng(Rng::derive(cfg.seed, 2));
  AdamW opt(model, cfg.learning_rate, cfg.weight_decay);
  TrainHistory hist;
  hist.best_val_loss = std::numeric_limits<double>::infinity();
  Mlp best = model;
  std::size_t bad_epochs = 0;

  const std::size_t n = x_train.rows();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Tape tape;
  std::vector<double> dpred;

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < n;) {
      std::size_t end = std::min(n, start + cfg.batch_size);
      // A trailing singleton batch carries no batch-norm statistics; fold it in.
      if (n - end == 1) end = n;
      const std::span<const std::size_t> idx(order.data() + start, end - start);
      const Matrix xb = x_train.gather_rows(idx);
      const std::vector<double> yb = gather(y_train, idx);

      model.forward_train(xb, &rng, nullptr, true, tape);
      const double loss = loss_with_gradient(cfg.loss, tape.predictions, yb, dpred);
      if (!std::isfinite(loss)) {
        throw Error("training diverged: non-finite loss at epoch " + std::to_string(epoch) +
                    ", batch " + std::to_string(batches));
      }
      opt.step(model, model.backward(tape, dpred));
      if (!model.all_finite()) {
        throw Error("training diverged: non-finite parameters at epoch " + std::to_string(epoch));
      }
      loss_sum += loss;
      ++batches;
      start = end;
    }
    hist.train_loss.push_back(loss_sum / static_cast<double>(batches));

    const double val = loss_value(cfg.loss, model.predict(x_val), y_val);
    if (!std::isfinite(val)) {
      throw Error("training diverged: non-finite validation loss at epoch " + std::to_string(epoch));
    }
    hist.val_loss.push_back(val);
    if (val < hist.best_val_loss) {
      hist.best_val_loss = val;
      hist.best_epoch = epoch;
      best = model;
      bad_epochs = 0;
    } else if (++bad_epochs > cfg.patience) {
      hist.stopped_early = true;
      break;
    }
  }
  model = std::move(best);
  return hist;
}

}  // namespace gpuperf::nn
