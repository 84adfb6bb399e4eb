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

#include "gpuperf/nn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gpuperf::nn {
namespace {

void check_sizes(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) throw std::invalid_argument("loss: size mismatch");
  if (pred.empty()) throw std::invalid_argument("loss: empty batch");
}

void check_q(double q) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("loss: quantile must lie in (0, 1)");
}

double pinball_term(double y, double p, double q) {
  const double e = y - p;
  return std::max(q * e, (q - 1.0) * e);
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

LossSpec LossSpec::quantile(double q) {
  check_q(q);
  return {LossKind::Quantile, q};
}

double loss_mape(std::span<const double> pred, std::span<const double> target) {
  check_sizes(pred, target);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!(target[i] > 0.0)) throw std::invalid_argument("loss: MAPE target must be positive");
    sum += std::abs(target[i] - pred[i]) / std::max(target[i], kMapeTargetFloor);
  }
  return sum / static_cast<double>(pred.size());
}

double loss_pinball(std::span<const double> pred, std::span<const double> target, double q) {
  check_sizes(pred, target);
  check_q(q);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += pinball_term(target[i], pred[i], q);
  return sum / static_cast<double>(pred.size());
}

double loss_value(const LossSpec& loss, std::span<const double> pred,
                  std::span<const double> target) {
  return loss.kind == LossKind::Mape ? loss_mape(pred, target)
                                     : loss_pinball(pred, target, loss.q);
}

double loss_with_gradient(const LossSpec& loss, std::span<const double> pred,
                          std::span<const double> target, std::vector<double>& grad) {
  const double value = loss_value(loss, pred, target);
  const double n = static_cast<double>(pred.size());
  grad.resize(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double diff = pred[i] - target[i];
    if (loss.kind == LossKind::Mape) {
      grad[i] = sign(diff) / std::max(target[i], kMapeTargetFloor) / n;
    } else {
      // d/dp of max(q*(y-p), (q-1)*(y-p))
      grad[i] = (diff < 0.0 ? -loss.q : (diff > 0.0 ? 1.0 - loss.q : 0.0)) / n;
    }
  }
  return value;
}

std::string to_string(const LossSpec& loss) {
  if (loss.kind == LossKind::Mape) return "mape";
  return "quantile(" + std::to_string(loss.q) + ")";
}

}  // namespace gpuperf::nn
