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
#include <span>
#include <vector>

#include "gpuperf/nn/matrix.hpp"
#include "gpuperf/rng.hpp"

namespace gpuperf::nn {

inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

struct Dense {
  Matrix weight;  // out_dim x in_dim
  std::vector<double> bias;
};

struct BatchNorm {
  std::vector<double> gamma;
  std::vector<double> beta;
  std::vector<double> running_mean;
  std::vector<double> running_var;
};

/// Per-hidden-layer dropout keep masks (1 = kept), one row per sample.
using DropoutMasks = std::vector<Matrix>;

/// Intermediate values of one training-mode forward pass.
struct Tape {
  struct Hidden {
    Matrix input;   // layer input
    Matrix pre;     // affine output
    Matrix xhat;    // normalized ReLU output
    std::vector<double> inv_std;
    Matrix mask;    // dropout keep mask
    Matrix output;  // post-dropout activation
  };
  std::vector<Hidden> hidden;
  Matrix last_input;
  std::vector<double> logits;
  std::vector<double> predictions;
};

/// Parameter gradients, laid out like Mlp::parameters().
using Gradients = std::vector<std::vector<double>>;

/// Fixed-topology regression MLP. Hidden layers apply
/// affine -> ReLU -> batch norm -> dropout; the output is affine -> sigmoid.
class Mlp {
 public:
  Mlp() = default;
  /// He-uniform weights from `seed`; output layer uses the same scheme.
  Mlp(std::size_t input_dim, std::vector<std::size_t> hidden, double dropout_rate,
      std::uint64_t seed);

  std::size_t input_dim() const { return dims_.empty() ? 0 : dims_.front(); }
  const std::vector<std::size_t>& layer_dims() const { return dims_; }
  double dropout_rate() const { return dropout_; }

  /// Eval mode: running batch-norm statistics, no dropout.
  std::vector<double> predict(const Matrix& x) const;

  /// Train mode. Masks are sampled from `rng` unless `fixed_masks` is
  /// given; running statistics are updated only when requested.
  void forward_train(const Matrix& x, Rng* rng, const DropoutMasks* fixed_masks,
                     bool update_running_stats, Tape& tape);

  /// Gradient of a loss w.r.t. every parameter given dL/dprediction.
  Gradients backward(const Tape& tape, std::span<const double> dpred) const;

  /// Views over every trainable tensor: per hidden layer W, b, gamma, beta;
  /// then output W, b.
  std::vector<std::span<double>> parameters();
  std::vector<std::span<const double>> parameters() const;
  Gradients zero_gradients() const;

  std::vector<Dense>& dense() { return dense_; }
  const std::vector<Dense>& dense() const { return dense_; }
  std::vector<BatchNorm>& batchnorm() { return bn_; }
  const std::vector<BatchNorm>& batchnorm() const { return bn_; }

  /// Assembles a model from stored tensors (deserialization).
  static Mlp from_parts(std::vector<std::size_t> dims, double dropout_rate,
                        std::vector<Dense> dense, std::vector<BatchNorm> bn);

  bool all_finite() const;

  friend bool operator==(const Mlp&, const Mlp&);

 private:
  std::vector<std::size_t> dims_;
  double dropout_ = 0.0;
  std::vector<Dense> dense_;   // hidden layers then the output layer
  std::vector<BatchNorm> bn_;  // one per hidden layer
};

double sigmoid(double x);

}  // namespace gpuperf::nn
