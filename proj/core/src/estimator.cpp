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

#include "gpuperf/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include <nlohmann/json.hpp>

#include "gpuperf/diag.hpp"
#include "gpuperf/nn/serialize.hpp"

namespace gpuperf {
namespace {

using nlohmann::json;

nn::Matrix to_matrix(const std::vector<std::vector<double>>& rows, std::size_t cols) {
  nn::Matrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
  return m;
}

void check_category(const Estimator& est, KernelCategory c) {
  if (!est.trained()) throw Error("estimator is not trained");
  if (c != est.category) {
    throw Error("estimator is for " + std::string(to_string(est.category)) + " kernels, got " +
                std::string(to_string(c)));
  }
}

}  // namespace

KernelAnalysis analyze_kernel(const KernelParams& params, const HardwareSpec& hw,
                              const TilingTable& tiling) {
  KernelAnalysis a;
  a.tasks = decompose(params, hw, tiling);
  a.distribution = schedule(a.tasks, hw);
  a.features = analyze(a.tasks, a.distribution, hw);
  return a;
}

FeatureVector build_features(const KernelParams& params, const HardwareSpec& hw,
                             const TilingTable& tiling) {
  return analyze_kernel(params, hw, tiling).features;
}

NormStats fit_norm_stats(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw Error("cannot fit normalization on an empty set");
  const std::size_t d = rows.front().size();
  NormStats s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (const auto& r : rows) {
    if (r.size() != d) throw Error("feature rows have inconsistent lengths");
    for (std::size_t j = 0; j < d; ++j) {
      if (r[j] < 0.0) throw Error("negative feature value");
      s.mean[j] += std::log1p(r[j]);
    }
  }
  const double n = static_cast<double>(rows.size());
  for (double& m : s.mean) m /= n;
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < d; ++j) {
      const double dv = std::log1p(r[j]) - s.mean[j];
      s.std[j] += dv * dv;
    }
  }
  for (double& v : s.std) v = std::sqrt(v / n);
  return s;
}

std::vector<double> normalize(const std::vector<double>& raw, const NormStats& stats) {
  if (raw.size() != stats.size()) throw Error("feature count does not match normalization stats");
  std::vector<double> z(raw.size());
  for (std::size_t j = 0; j < raw.size(); ++j) {
    if (raw[j] < 0.0) throw Error("negative feature value");
    const double sd = stats.std[j] < kStdGuard ? 1.0 : stats.std[j];
    z[j] = (std::log1p(raw[j]) - stats.mean[j]) / sd;
  }
  return z;
}

std::vector<double> denormalize(const std::vector<double>& z, const NormStats& stats) {
  if (z.size() != stats.size()) throw Error("feature count does not match normalization stats");
  std::vector<double> raw(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) {
    const double sd = stats.std[j] < kStdGuard ? 1.0 : stats.std[j];
    raw[j] = std::expm1(z[j] * sd + stats.mean[j]);
  }
  return raw;
}

double PreparedSample::raw_efficiency() const {
  if (!(latency_us > 0.0)) throw Error("measured latency must be positive");
  return features.theoretical_time_us / latency_us;
}

PreparedSample prepare(const Sample& s, const HardwareSpec& hw, const TilingTable& tiling) {
  if (!(s.latency_us > 0.0)) throw Error("measured latency must be positive");
  return PreparedSample{s.hardware, build_features(s.params, hw, tiling), s.latency_us};
}

std::vector<double> Estimator::predict_efficiency(const std::vector<FeatureVector>& fvs) const {
  if (!trained()) throw Error("estimator is not trained");
  if (fvs.empty()) return {};
  std::vector<std::vector<double>> rows;
  rows.reserve(fvs.size());
  for (const auto& fv : fvs) {
    check_category(*this, fv.category);
    rows.push_back(normalize(fv.values(), norm));
  }
  return model.predict(to_matrix(rows, norm.size()));
}

double Estimator::predict_efficiency(const FeatureVector& fv) const {
  return predict_efficiency(std::vector<FeatureVector>{fv}).front();
}

json Estimator::to_json() const {
  json j = nn::to_json(model);
  j["category"] = to_string(category);
  j["layout"] = layout;
  j["norm_stats"] = {{"mean", norm.mean}, {"std", norm.std}};
  j["loss"] = nn::to_json(loss);
  j["train_config"] = nn::to_json(config);
  return j;
}

Estimator Estimator::from_json(const json& j) {
  Estimator e;
  try {
    e.model = nn::mlp_from_json(j);
    e.category = parse_category(j.at("category").get<std::string>());
    e.layout = j.at("layout").get<std::vector<std::string>>();
    e.norm.mean = j.at("norm_stats").at("mean").get<std::vector<double>>();
    e.norm.std = j.at("norm_stats").at("std").get<std::vector<double>>();
    e.loss = nn::loss_from_json(j.at("loss"));
    if (j.contains("train_config")) e.config = nn::train_config_from_json(j.at("train_config"));
  } catch (const json::exception& ex) {
    throw Error(std::string("malformed estimator file: ") + ex.what());
  } catch (const std::invalid_argument& ex) {
    throw Error(std::string("malformed estimator file: ") + ex.what());
  }
  if (e.layout != feature_layout(e.category)) {
    throw Error("estimator feature layout does not match the " +
                std::string(to_string(e.category)) + " layout");
  }
  if (e.norm.mean.size() != e.layout.size() || e.norm.std.size() != e.layout.size()) {
    throw Error("estimator normalization stats do not match the feature layout");
  }
  if (e.model.input_dim() != e.layout.size()) {
    throw Error("estimator model input size does not match the feature layout");
  }
  return e;
}

void Estimator::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json().dump(1) << '\n';
  if (!out) throw Error("failed writing " + path.string());
}

Estimator Estimator::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& ex) {
    throw Error(path.string() + ": " + ex.what());
  }
  return from_json(j);
}

bool clamp_efficiency(double& e) {
  if (!(e > 0.0) || !std::isfinite(e)) throw Error("efficiency must be positive and finite");
  if (e > kMaxEfficiency) {
    throw Error("efficiency " + std::to_string(e) + " exceeds the theoretical roof");
  }
  if (e > 1.0) {
    e = 1.0;
    return true;
  }
  return false;
}

FitResult fit(const std::vector<PreparedSample>& samples, const nn::TrainConfig& cfg) {
  cfg.validate();
  if (samples.size() < kMinFitSamples) {
    throw Error("need at least " + std::to_string(kMinFitSamples) + " samples to fit, got " +
                std::to_string(samples.size()));
  }
  const KernelCategory category = samples.front().features.category;
  for (const auto& s : samples) {
    if (s.features.category != category) throw Error("fit needs samples of a single kernel category");
  }

  FitResult r;
  std::vector<double> targets;
  targets.reserve(samples.size());
  for (const auto& s : samples) {
    double e = s.raw_efficiency();
    if (clamp_efficiency(e)) ++r.clamped_targets;
    targets.push_back(e);
  }
  if (r.clamped_targets > 0) {
    warn(std::to_string(r.clamped_targets) + " efficiency targets above 1 were clamped to 1");
  }

  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(Rng::derive(cfg.seed, 1));
  rng.shuffle(order);
  const auto n_val = static_cast<std::size_t>(
      std::floor(cfg.validation_fraction * static_cast<double>(samples.size())));
  if (n_val == 0) throw Error("validation split is empty");
  const std::size_t n_train = samples.size() - n_val;

  std::vector<std::vector<double>> raw_train, raw_val;
  std::vector<double> y_train, y_val;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t i = order[k];
    (k < n_train ? raw_train : raw_val).push_back(samples[i].features.values());
    (k < n_train ? y_train : y_val).push_back(targets[i]);
  }

  Estimator& est = r.estimator;
  est.category = category;
  est.layout = feature_layout(category);
  est.loss = cfg.loss;
  est.config = cfg;
  est.norm = fit_norm_stats(raw_train);

  auto normalized = [&](const std::vector<std::vector<double>>& raw) {
    std::vector<std::vector<double>> z;
    z.reserve(raw.size());
    for (const auto& row : raw) z.push_back(normalize(row, est.norm));
    return to_matrix(z, est.layout.size());
  };
  est.model = nn::make_model(est.layout.size(), cfg);
  try {
    r.history = nn::train(est.model, normalized(raw_train), y_train, normalized(raw_val), y_val, cfg);
  } catch (const std::invalid_argument& ex) {
    throw Error(ex.what());
  }
  r.train_count = n_train;
  r.validation_count = n_val;
  return r;
}

LatencyPrediction predict(const Estimator& est, const KernelParams& params,
                          const HardwareSpec& hw, const TilingTable& tiling) {
  check_category(est, params.category());
  const FeatureVector fv = build_features(params, hw, tiling);
  LatencyPrediction p;
  p.theoretical_time_us = fv.theoretical_time_us;
  // Keep the efficiency strictly below 1 even where the sigmoid saturates.
  p.efficiency = std::min(est.predict_efficiency(fv), std::nextafter(1.0, 0.0));
  p.latency_us = p.theoretical_time_us / p.efficiency;
  return p;
}

double predict_latency(const Estimator& est, const KernelParams& params, const HardwareSpec& hw,
                       const TilingTable& tiling) {
  return predict(est, params, hw, tiling).latency_us;
}

GapResult classify_gap(double predicted_ceiling, double actual_efficiency) {
  GapResult g;
  g.predicted = predicted_ceiling;
  g.actual = actual_efficiency;
  g.gap = predicted_ceiling - actual_efficiency;
  g.underperforming = g.gap > kGapThreshold;
  return g;
}

GapResult perf_gap(const Estimator& est_p80, const PreparedSample& sample) {
  if (!est_p80.is_quantile()) throw Error("performance gap needs a quantile-mode estimator");
  double actual = sample.raw_efficiency();
  clamp_efficiency(actual);
  return classify_gap(est_p80.predict_efficiency(sample.features), actual);
}

double HardwareGapSummary::cdf(double x) const {
  if (gaps.empty()) return 0.0;
  const auto it = std::upper_bound(gaps.begin(), gaps.end(), x);
  return static_cast<double>(it - gaps.begin()) / static_cast<double>(gaps.size());
}

std::size_t GapReport::total_underperforming() const {
  std::size_t n = 0;
  for (const auto& h : per_hardware) n += h.underperforming;
  return n;
}

GapReport gap_report(const Estimator& est_p80, const std::vector<PreparedSample>& samples) {
  GapReport report;
  if (samples.empty()) return report;
  if (!est_p80.is_quantile()) throw Error("performance gap needs a quantile-mode estimator");

  std::vector<FeatureVector> fvs;
  fvs.reserve(samples.size());
  for (const auto& s : samples) fvs.push_back(s.features);
  const auto ceilings = est_p80.predict_efficiency(fvs);

  std::map<std::string, HardwareGapSummary> by_hw;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double actual = samples[i].raw_efficiency();
    clamp_efficiency(actual);
    const GapResult g = classify_gap(ceilings[i], actual);
    auto& h = by_hw[samples[i].hardware];
    h.hardware = samples[i].hardware;
    ++h.samples;
    if (g.underperforming) ++h.underperforming;
    h.gaps.push_back(g.gap);
  }
  for (auto& [name, h] : by_hw) {
    std::sort(h.gaps.begin(), h.gaps.end());
    h.fraction = static_cast<double>(h.underperforming) / static_cast<double>(h.samples);
    report.per_hardware.push_back(std::move(h));
  }
  return report;
}

std::vector<double> gap_cdf_grid() {
  std::vector<double> grid;
  for (int i = -10; i <= 10; ++i) grid.push_back(0.05 * i);
  return grid;
}

json to_json(const GapReport& report) {
  json hw = json::array();
  for (const auto& h : report.per_hardware) {
    json cdf = json::array();
    for (double x : gap_cdf_grid()) cdf.push_back({{"gap", x}, {"fraction", h.cdf(x)}});
    hw.push_back({{"hardware", h.hardware},
                  {"samples", h.samples},
                  {"underperforming", h.underperforming},
                  {"fraction", h.fraction},
                  {"cdf", cdf}});
  }
  return {{"threshold", report.threshold},
          {"total_underperforming", report.total_underperforming()},
          {"hardware", hw}};
}

double mape(const std::vector<double>& pred, const std::vector<double>& actual) {
  if (pred.size() != actual.size()) throw Error("mape: size mismatch");
  if (pred.empty()) throw Error("mape: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!(actual[i] > 0.0)) throw Error("mape: actual values must be positive");
    sum += std::abs(pred[i] - actual[i]) / actual[i];
  }
  return sum / static_cast<double>(pred.size());
}

}  // namespace gpuperf
