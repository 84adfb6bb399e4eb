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

#include <span>
#include <string>
#include <vector>

namespace gpuperf::nn {

enum class LossKind { Mape, Quantile };

struct LossSpec {
  LossKind kind = LossKind::Mape;
  double q = 0.5;  // only meaningful for Quantile

  static LossSpec mape() { return {LossKind::Mape, 0.5}; }
  static LossSpec quantile(double q);

  friend bool operator==(const LossSpec&, const LossSpec&) = default;
};

/// Lower clamp applied to MAPE denominators.
inline constexpr double kMapeTargetFloor = 1e-6;

/// mean(|target - pred| / target). Throws std::invalid_argument on a
/// non-positive target or length mismatch.
double loss_mape(std::span<const double> pred, std::span<const double> target);

/// mean(max(q*(y - p), (q - 1)*(y - p))).
double loss_pinball(std::span<const double> pred, std::span<const double> target, double q);

double loss_value(const LossSpec& loss, std::span<const double> pred,
                  std::span<const double> target);

/// Loss value and dL/dpred.
double loss_with_gradient(const LossSpec& loss, std::span<const double> pred,
                          std::span<const double> target, std::vector<double>& grad);

std::string to_string(const LossSpec& loss);

}  // namespace gpuperf::nn
