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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gpuperf/common.hpp"

namespace gpuperf {

/// Architectural parameter vector for one GPU model.
///
/// Units: counts are dimensionless, bandwidths are GB/s with GB = 1e9 bytes,
/// clocks are MHz (= cycles/us), sizes are KiB, throughputs are
/// ops/cycle/SM. Immutable once loaded.
struct HardwareSpec {
  std::string name;
  double compute_capability = 0.0;
  int num_sms = 0;
  double sm_clock_mhz = 0.0;
  std::map<Precision, double> tensor_throughput;
  double fma_throughput = 0.0;
  double xu_throughput = 0.0;
  double global_mem_bw_gbps = 0.0;
  double l2_bw_gbps = 0.0;
  double smem_bw_bytes_per_cycle_per_sm = 0.0;
  double smem_size_per_sm_kib = 0.0;
  double regfile_size_per_sm_kib = 0.0;
  int max_warps_per_sm = 64;
  int max_ctas_per_sm = 32;

  /// Throughput of `p` for the given operand precision. Returns nullopt when
  /// the spec carries no tensor entry for that precision.
  std::optional<double> throughput(Pipeline p, Precision precision) const;
};

enum class Validation { Warn, Strict };

/// Parse and validate. Positivity violations always throw; values outside
/// the documented per-parameter range warn (Validation::Warn) or throw
/// (Validation::Strict).
HardwareSpec parse_spec(const nlohmann::json& j, Validation mode = Validation::Warn);
HardwareSpec load_spec(const std::filesystem::path& path,
                       Validation mode = Validation::Warn);
nlohmann::json to_json(const HardwareSpec& spec);

/// Range-check messages for `spec` (empty when every field is in range).
std::vector<std::string> range_violations(const HardwareSpec& spec);

/// SM-clock cycles to microseconds.
double cycles_to_us(double cycles, const HardwareSpec& spec);

/// Cycles (at SM clock) needed to move `bytes` at `bw_gbps`.
double bytes_to_cycles(double bytes, double bw_gbps, const HardwareSpec& spec);

/// A directory of *.json spec files, addressable by spec name or file stem.
class SpecRegistry {
 public:
  SpecRegistry() = default;
  explicit SpecRegistry(const std::filesystem::path& dir,
                        Validation mode = Validation::Warn);

  void add(HardwareSpec spec);
  const HardwareSpec& get(const std::string& name) const;
  bool contains(const std::string& name) const;
  std::vector<std::string> names() const;

  /// Resolves either a path to a spec file or a name in the registry.
  const HardwareSpec& resolve(const std::string& path_or_name);

 private:
  std::map<std::string, HardwareSpec> specs_;
  std::map<std::string, std::string> aliases_;
};

/// Value of GPUPERF_SPEC_DIR, when set.
std::optional<std::filesystem::path> default_spec_dir();

}  // namespace gpuperf
