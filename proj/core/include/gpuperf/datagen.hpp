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
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gpuperf/estimator.hpp"
#include "gpuperf/hwspec.hpp"
#include "gpuperf/kernel_params.hpp"
#include "gpuperf/rng.hpp"
#include "gpuperf/tiling.hpp"

namespace gpuperf {

/// One measured (or synthesized) kernel execution. On disk this is one
/// JSONL line: {"kernel", "params", "hardware", "latency_us", "tags"}.
struct DatasetRecord {
  KernelParams params;
  std::string hardware;
  double latency_us = 0.0;
  std::map<std::string, std::string> tags;  // "precision" is always written

  KernelCategory category() const { return params.category(); }
  Sample sample() const { return {params, hardware, latency_us}; }
};

bool operator==(const DatasetRecord& a, const DatasetRecord& b);

nlohmann::json to_json(const DatasetRecord& r);
/// Throws Error on a malformed record.
DatasetRecord record_from_json(const nlohmann::json& j);

struct LoadOptions {
  bool skip_malformed = false;  // warn and continue instead of failing
};

struct LoadResult {
  std::vector<DatasetRecord> records;
  std::vector<std::string> skipped;  // "<path>:<line>: <reason>"
};

LoadResult load_dataset(const std::filesystem::path& path, const LoadOptions& opts = {});
void write_dataset(std::ostream& out, const std::vector<DatasetRecord>& records);
void write_dataset(const std::filesystem::path& path, const std::vector<DatasetRecord>& records);

/// Seeded split stratified by hardware name: every hardware with at least
/// five records lands in both halves. Record order is preserved.
std::pair<std::vector<DatasetRecord>, std::vector<DatasetRecord>> split(
    const std::vector<DatasetRecord>& records, double test_fraction, std::uint64_t seed);

/// Per-virtual-GPU behaviour of the synthetic ground truth.
struct OracleProfile {
  std::string hardware;
  double e_max = 0.85;             // efficiency asymptote, in (0, 1)
  double ramp_us = 20.0;           // demand scale of the efficiency ramp
  double interference = 0.15;      // second-roof coupling
  double imbalance_penalty = 0.4;  // per unit of (imbalance_ratio - 1)
  double noise_sigma = 0.03;       // relative Gaussian noise
};

struct SyntheticOracle {
  std::vector<OracleProfile> profiles;
  std::uint64_t seed = 0;

  const OracleProfile& profile(const std::string& hardware) const;

  static SyntheticOracle from_json(const nlohmann::json& j);
  static SyntheticOracle load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

/// Lowest efficiency the oracle emits.
inline constexpr double kOracleMinEfficiency = 0.01;

/// Deterministic part of the oracle given a standard-normal draw `z`:
/// e_max*(1-exp(-demand/ramp)) * (1-interference*r2/r1)
///   * (1-penalty*(imbalance-1)) * (1+sigma*z), clamped to [0.01, e_max].
/// demand is theoretical_time_us; r1 >= r2 are the two largest roofs.
double synth_efficiency(const OracleProfile& p, const FeatureVector& fv, double imbalance_ratio,
                        double z);

/// Oracle latency for an analyzed kernel; draws one normal from `rng`.
double synth_latency(const OracleProfile& p, const KernelAnalysis& analysis,
                     const HardwareSpec& hw, Rng& rng);

/// Inclusive integer sampling range.
struct ParamRange {
  Count lo = 1;
  Count hi = 1;
};
using CategoryRanges = std::map<std::string, ParamRange>;

/// Dataset parameter ranges per category (keys match params JSON names;
/// attention uses "bs", "nh", "nkv", "qlen", "kvlen"; head_dim is 64 or 128).
CategoryRanges default_ranges(KernelCategory c);

/// Log-uniform sample of one parameter set within `ranges`.
KernelParams sample_params(KernelCategory c, const CategoryRanges& ranges, const HardwareSpec& hw,
                           Rng& rng);

/// Lowers the efficiency of a random subset of one GPU's samples.
struct Degradation {
  std::string hardware;
  double fraction = 0.2;
  double delta = 0.2;
};

struct GenerateConfig {
  std::vector<KernelCategory> categories;
  std::vector<HardwareSpec> hardware;
  std::size_t n_per_cell = 0;
  std::map<KernelCategory, CategoryRanges> ranges;  // overrides defaults
  std::optional<Degradation> degradation;
  std::uint64_t seed = 0;
};

/// Generates n_per_cell records for every (category, hardware) cell, in
/// category-major order. Each cell uses its own derived seed.
std::vector<DatasetRecord> generate_dataset(const GenerateConfig& cfg,
                                            const SyntheticOracle& oracle,
                                            const TilingTable& tiling);

}  // namespace gpuperf
