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

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gpuperf/features.hpp"
#include "gpuperf/hwspec.hpp"
#include "gpuperf/kernel_params.hpp"
#include "gpuperf/nn/mlp.hpp"
#include "gpuperf/nn/train.hpp"
#include "gpuperf/scheduler.hpp"
#include "gpuperf/tiling.hpp"

namespace gpuperf {

/// Efficiency gap above which a configuration is reported as underperforming.
inline constexpr double kGapThreshold = 0.1;
/// Default ceiling quantile.
inline constexpr double kCeilingQuantile = 0.8;
/// Efficiencies above this are rejected as inconsistent with the roof.
inline constexpr double kMaxEfficiency = 1.05;
/// Normalization std guard.
inline constexpr double kStdGuard = 1e-8;
/// Minimum training set size for fit().
inline constexpr std::size_t kMinFitSamples = 100;

/// Intermediate products of the analytical pipeline.
struct KernelAnalysis {
  TaskSet tasks;
  TaskDistribution distribution;
  FeatureVector features;
};

/// decompose -> schedule (policy from the tiling entry) -> analyze.
KernelAnalysis analyze_kernel(const KernelParams& params, const HardwareSpec& hw,
                              const TilingTable& tiling);
FeatureVector build_features(const KernelParams& params, const HardwareSpec& hw,
                             const TilingTable& tiling);

/// Per-feature statistics of log1p(x).
struct NormStats {
  std::vector<double> mean;
  std::vector<double> std;

  std::size_t size() const { return mean.size(); }
};

NormStats fit_norm_stats(const std::vector<std::vector<double>>& rows);
std::vector<double> normalize(const std::vector<double>& raw, const NormStats& stats);
std::vector<double> denormalize(const std::vector<double>& z, const NormStats& stats);

/// A measured kernel execution.
struct Sample {
  KernelParams params;
  std::string hardware;
  double latency_us = 0.0;
};

/// A sample with its analytical features attached.
struct PreparedSample {
  std::string hardware;
  FeatureVector features;
  double latency_us = 0.0;

  /// theoretical_time_us / latency_us, unclamped.
  double raw_efficiency() const;
};

PreparedSample prepare(const Sample& s, const HardwareSpec& hw, const TilingTable& tiling);

class Estimator {
 public:
  KernelCategory category = KernelCategory::Gemm;
  nn::Mlp model;
  NormStats norm;
  std::vector<std::string> layout;
  nn::LossSpec loss;
  nn::TrainConfig config;

  bool trained() const { return model.input_dim() != 0; }
  bool is_quantile() const { return loss.kind == nn::LossKind::Quantile; }

  /// Predicted efficiency in (0, 1) for each feature vector.
  std::vector<double> predict_efficiency(const std::vector<FeatureVector>& fvs) const;
  double predict_efficiency(const FeatureVector& fv) const;

  nlohmann::json to_json() const;
  static Estimator from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static Estimator load(const std::filesystem::path& path);
};

struct FitResult {
  Estimator estimator;
  nn::TrainHistory history;
  std::size_t clamped_targets = 0;  // efficiencies in (1, kMaxEfficiency] set to 1
  std::size_t train_count = 0;
  std::size_t validation_count = 0;
};

/// Clamps an efficiency target into (0, 1]; returns whether it was clamped.
/// Throws Error for values <= 0 or above kMaxEfficiency.
bool clamp_efficiency(double& e);

/// Trains a per-category estimator on efficiency targets. The validation
/// split is drawn with cfg.seed; normalization is fitted on the rest.
FitResult fit(const std::vector<PreparedSample>& samples, const nn::TrainConfig& cfg);

struct LatencyPrediction {
  double latency_us = 0.0;
  double efficiency = 0.0;
  double theoretical_time_us = 0.0;
};

LatencyPrediction predict(const Estimator& est, const KernelParams& params,
                          const HardwareSpec& hw, const TilingTable& tiling);
double predict_latency(const Estimator& est, const KernelParams& params, const HardwareSpec& hw,
                       const TilingTable& tiling);

struct GapResult {
  double predicted = 0.0;  // ceiling efficiency
  double actual = 0.0;     // measured efficiency, clamped to 1
  double gap = 0.0;
  bool underperforming = false;
};

/// Underperforming iff gap > kGapThreshold.
GapResult classify_gap(double predicted_ceiling, double actual_efficiency);
GapResult perf_gap(const Estimator& est_p80, const PreparedSample& sample);

struct HardwareGapSummary {
  std::string hardware;
  std::size_t samples = 0;
  std::size_t underperforming = 0;
  double fraction = 0.0;
  std::vector<double> gaps;  // ascending

  /// Fraction of gaps <= x.
  double cdf(double x) const;
};

struct GapReport {
  std::vector<HardwareGapSummary> per_hardware;  // sorted by name
  double threshold = kGapThreshold;

  std::size_t total_underperforming() const;
};

GapReport gap_report(const Estimator& est_p80, const std::vector<PreparedSample>& samples);

/// Points at which the CLI tabulates gap CDFs.
std::vector<double> gap_cdf_grid();

nlohmann::json to_json(const GapReport& report);

/// Mean absolute percentage error.
double mape(const std::vector<double>& pred, const std::vector<double>& actual);

}  // namespace gpuperf
