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

#include "gpuperf/nn/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gpuperf::nn {
namespace {

void check_input(const Matrix& x, std::size_t input_dim) {
  if (x.cols() != input_dim) {
    throw std::invalid_argument("mlp: expected " + std::to_string(input_dim) +
                                " input features, got " + std::to_string(x.cols()));
  }
  for (double v : x.data()) {
    if (!std::isfinite(v)) throw std::invalid_argument("mlp: non-finite input");
  }
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Mlp::Mlp(std::size_t input_dim, std::vector<std::size_t> hidden, double dropout_rate,
         std::uint64_t seed)
    : dropout_(dropout_rate) {
  if (input_dim == 0) throw std::invalid_argument("mlp: input_dim must be > 0");
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw std::invalid_argument("mlp: dropout rate must be in [0, 1)");
  }
  dims_.push_back(input_dim);
  dims_.insert(dims_.end(), hidden.begin(), hidden.end());
  dims_.push_back(1);

  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    const std::size_t in = dims_[l];
    const std::size_t out = dims_[l + 1];
    Dense d{Matrix(out, in), std::vector<double>(out, 0.0)};
    const double limit = std::sqrt(6.0 / static_cast<double>(in));
    for (double& w : d.weight.data()) w = rng.uniform(-limit, limit);
    dense_.push_back(std::move(d));
    if (l + 2 < dims_.size()) {
      bn_.push_back(BatchNorm{std::vector<double>(out, 1.0), std::vector<double>(out, 0.0),
                              std::vector<double>(out, 0.0), std::vector<double>(out, 1.0)});
    }
  }
}

Mlp Mlp::from_parts(std::vector<std::size_t> dims, double dropout_rate, std::vector<Dense> dense,
                    std::vector<BatchNorm> bn) {
  if (dims.size() < 2 || dense.size() != dims.size() - 1 || bn.size() != dims.size() - 2) {
    throw std::invalid_argument("mlp: inconsistent layer structure");
  }
  for (std::size_t l = 0; l < dense.size(); ++l) {
    if (dense[l].weight.rows() != dims[l + 1] || dense[l].weight.cols() != dims[l] ||
        dense[l].bias.size() != dims[l + 1]) {
      throw std::invalid_argument("mlp: layer " + std::to_string(l) + " has wrong shape");
    }
  }
  for (std::size_t l = 0; l < bn.size(); ++l) {
    const std::size_t w = dims[l + 1];
    if (bn[l].gamma.size() != w || bn[l].beta.size() != w || bn[l].running_mean.size() != w ||
        bn[l].running_var.size() != w) {
      throw std::invalid_argument("mlp: batchnorm " + std::to_string(l) + " has wrong shape");
    }
    for (double v : bn[l].running_var) {
      if (!(v > 0.0)) throw std::invalid_argument("mlp: running variance must be > 0");
    }
  }
  Mlp m;
  m.dims_ = std::move(dims);
  m.dropout_ = dropout_rate;
  m.dense_ = std::move(dense);
  m.bn_ = std::move(bn);
  return m;
}

std::vector<double> Mlp::predict(const Matrix& x) const {
  check_input(x, input_dim());
  Matrix h = x;
  Matrix z;
  for (std::size_t l = 0; l < bn_.size(); ++l) {
    affine(h, dense_[l].weight, dense_[l].bias, z);
    const BatchNorm& bn = bn_[l];
    for (std::size_t i = 0; i < z.rows(); ++i) {
      auto r = z.row(i);
      for (std::size_t c = 0; c < r.size(); ++c) {
        const double a = std::max(0.0, r[c]);
        r[c] = bn.gamma[c] * (a - bn.running_mean[c]) / std::sqrt(bn.running_var[c] + kBatchNormEps) +
               bn.beta[c];
      }
    }
    std::swap(h, z);
  }
  affine(h, dense_.back().weight, dense_.back().bias, z);
  std::vector<double> out(z.rows());
  for (std::size_t i = 0; i < z.rows(); ++i) out[i] = sigmoid(z(i, 0));
  return out;
}

void Mlp::forward_train(const Matrix& x, Rng* rng, const DropoutMasks* fixed_masks,
                        bool update_running_stats, Tape& tape) {
  check_input(x, input_dim());
  const std::size_t n = x.rows();
  if (n == 0) throw std::invalid_argument("mlp: empty batch");
  if (!fixed_masks && !rng && dropout_ > 0.0) {
    throw std::invalid_argument("mlp: dropout needs an rng or fixed masks");
  }
  const double keep_scale = 1.0 / (1.0 - dropout_);

  tape.hidden.resize(bn_.size());
  const Matrix* input = &x;
  for (std::size_t l = 0; l < bn_.size(); ++l) {
    auto& t = tape.hidden[l];
    BatchNorm& bn = bn_[l];
    t.input = *input;
    affine(t.input, dense_[l].weight, dense_[l].bias, t.pre);
    const std::size_t width = t.pre.cols();

    std::vector<double> mean(width, 0.0), var(width, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      auto r = t.pre.row(i);
      for (std::size_t c = 0; c < width; ++c) mean[c] += std::max(0.0, r[c]);
    }
    for (double& m : mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto r = t.pre.row(i);
      for (std::size_t c = 0; c < width; ++c) {
        const double d = std::max(0.0, r[c]) - mean[c];
        var[c] += d * d;
      }
    }
    for (double& v : var) v /= static_cast<double>(n);

    t.inv_std.resize(width);
    for (std::size_t c = 0; c < width; ++c) t.inv_std[c] = 1.0 / std::sqrt(var[c] + kBatchNormEps);

    if (fixed_masks) {
      t.mask = (*fixed_masks)[l];
      if (t.mask.rows() != n || t.mask.cols() != width) {
        throw std::invalid_argument("mlp: fixed dropout mask has wrong shape");
      }
    } else {
      t.mask = Matrix(n, width, 1.0);
      if (dropout_ > 0.0) {
        for (double& m : t.mask.data()) m = rng->uniform() < dropout_ ? 0.0 : 1.0;
      }
    }

    t.xhat = Matrix(n, width);
    t.output = Matrix(n, width);
    for (std::size_t i = 0; i < n; ++i) {
      auto pre = t.pre.row(i);
      auto xh = t.xhat.row(i);
      auto out = t.output.row(i);
      auto mask = t.mask.row(i);
      for (std::size_t c = 0; c < width; ++c) {
        xh[c] = (std::max(0.0, pre[c]) - mean[c]) * t.inv_std[c];
        out[c] = (bn.gamma[c] * xh[c] + bn.beta[c]) * mask[c] * keep_scale;
      }
    }

    if (update_running_stats) {
      const double unbias = n > 1 ? static_cast<double>(n) / static_cast<double>(n - 1) : 1.0;
      for (std::size_t c = 0; c < width; ++c) {
        bn.running_mean[c] =
            (1.0 - kBatchNormMomentum) * bn.running_mean[c] + kBatchNormMomentum * mean[c];
        bn.running_var[c] =
            (1.0 - kBatchNormMomentum) * bn.running_var[c] + kBatchNormMomentum * var[c] * unbias;
      }
    }
    input = &t.output;
  }

  tape.last_input = *input;
  Matrix logits;
  affine(tape.last_input, dense_.back().weight, dense_.back().bias, logits);
  tape.logits.resize(n);
  tape.predictions.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    tape.logits[i] = logits(i, 0);
    tape.predictions[i] = sigmoid(logits(i, 0));
  }
}

Gradients Mlp::backward(const Tape& tape, std::span<const double> dpred) const {
  const std::size_t n = tape.predictions.size();
  if (dpred.size() != n) throw std::invalid_argument("mlp: gradient size mismatch");
  Gradients grads = zero_gradients();
  const std::size_t hidden_layers = bn_.size();
  const double keep_scale = 1.0 / (1.0 - dropout_);

  // Output layer.
  Matrix dlogit(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = tape.predictions[i];
    dlogit(i, 0) = dpred[i] * p * (1.0 - p);
  }
  const std::size_t out_w = 4 * hidden_layers;
  Matrix dw_out(dense_.back().weight.rows(), dense_.back().weight.cols());
  Matrix dh;
  affine_backward(tape.last_input, dense_.back().weight, dlogit, dw_out, grads[out_w + 1], &dh);
  grads[out_w] = std::move(dw_out.data());

  for (std::size_t l = hidden_layers; l-- > 0;) {
    const auto& t = tape.hidden[l];
    const BatchNorm& bn = bn_[l];
    const std::size_t width = t.pre.cols();
    auto& dgamma = grads[4 * l + 2];
    auto& dbeta = grads[4 * l + 3];

    Matrix dxhat(n, width);
    std::vector<double> sum_dxhat(width, 0.0), sum_dxhat_xhat(width, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < width; ++c) {
        const double dy = dh(i, c) * t.mask(i, c) * keep_scale;
        dgamma[c] += dy * t.xhat(i, c);
        dbeta[c] += dy;
        const double dx = dy * bn.gamma[c];
        dxhat(i, c) = dx;
        sum_dxhat[c] += dx;
        sum_dxhat_xhat[c] += dx * t.xhat(i, c);
      }
    }
    const double nn = static_cast<double>(n);
    Matrix dpre(n, width);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < width; ++c) {
        if (t.pre(i, c) <= 0.0) continue;  // ReLU
        dpre(i, c) = t.inv_std[c] / nn *
                     (nn * dxhat(i, c) - sum_dxhat[c] - t.xhat(i, c) * sum_dxhat_xhat[c]);
      }
    }
    Matrix dw(dense_[l].weight.rows(), dense_[l].weight.cols());
    Matrix dinput;
    affine_backward(t.input, dense_[l].weight, dpre, dw, grads[4 * l + 1], l > 0 ? &dinput : nullptr);
    grads[4 * l] = std::move(dw.data());
    dh = std::move(dinput);
  }
  return grads;
}

std::vector<std::span<double>> Mlp::parameters() {
  std::vector<std::span<double>> out;
  for (std::size_t l = 0; l < bn_.size(); ++l) {
    out.emplace_back(dense_[l].weight.data());
    out.emplace_back(dense_[l].bias);
    out.emplace_back(bn_[l].gamma);
    out.emplace_back(bn_[l].beta);
  }
  out.emplace_back(dense_.back().weight.data());
  out.emplace_back(dense_.back().bias);
  return out;
}

std::vector<std::span<const double>> Mlp::parameters() const {
  std::vector<std::span<const double>> out;
  for (std::size_t l = 0; l < bn_.size(); ++l) {
    out.emplace_back(dense_[l].weight.data());
    out.emplace_back(dense_[l].bias);
    out.emplace_back(bn_[l].gamma);
    out.emplace_back(bn_[l].beta);
  }
  out.emplace_back(dense_.back().weight.data());
  out.emplace_back(dense_.back().bias);
  return out;
}

Gradients Mlp::zero_gradients() const {
  Gradients g;
  for (auto p : parameters()) g.emplace_back(p.size(), 0.0);
  return g;
}

bool Mlp::all_finite() const {
  for (auto p : parameters()) {
    for (double v : p) {
      if (!std::isfinite(v)) return false;
    }
  }
  for (const auto& bn : bn_) {
    for (double v : bn.running_mean) {
      if (!std::isfinite(v)) return false;
    }
    for (double v : bn.running_var) {
      if (!std::isfinite(v) || v <= 0.0) return false;
    }
  }
  return true;
}

bool operator==(const Mlp& a, const Mlp& b) {
  if (a.dims_ != b.dims_ || a.dropout_ != b.dropout_ || a.dense_.size() != b.dense_.size() ||
      a.bn_.size() != b.bn_.size()) {
    return false;
  }
  for (std::size_t l = 0; l < a.dense_.size(); ++l) {
    if (!(a.dense_[l].weight == b.dense_[l].weight) || a.dense_[l].bias != b.dense_[l].bias) {
      return false;
    }
  }
  for (std::size_t l = 0; l < a.bn_.size(); ++l) {
    const auto& x = a.bn_[l];
    const auto& y = b.bn_[l];
    if (x.gamma != y.gamma || x.beta != y.beta || x.running_mean != y.running_mean ||
        x.running_var != y.running_var) {
      return false;
    }
  }
  return true;
}

}  // namespace gpuperf::nn
