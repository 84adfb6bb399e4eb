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
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gpuperf/common.hpp"
#include "gpuperf/kernel_params.hpp"

namespace gpuperf {

enum class ExecutionParadigm { ConventionalCTA, Persistent };
enum class SchedulePolicy { RoundRobin, MinHeap, Striped };

std::string_view to_string(ExecutionParadigm p);
std::string_view to_string(SchedulePolicy p);

/// Per-CTA resource requirements used by the occupancy calculation.
struct Footprint {
  Count smem_bytes = 0;
  int regs_per_thread = 0;
  int warps = 0;
};

/// Tile geometry for one (category, precision, architecture) combination.
/// Elementwise kernels use `tile_m` as the number of rows per task.
struct TilingEntry {
  KernelCategory category = KernelCategory::Gemm;
  std::string precision = "*";  // precision tag or "*"
  std::string arch = "*";       // compute-capability prefix ("8.0", "9") or "*"
  std::string variant;          // attention only: "fa2" / "fa3"; empty matches any
  Count tile_m = 128;
  Count tile_n = 128;
  std::optional<Count> tile_k;
  std::optional<Count> q_block;
  std::optional<Count> kv_block;
  Footprint footprint;
  ExecutionParadigm paradigm = ExecutionParadigm::ConventionalCTA;
  std::optional<SchedulePolicy> policy;  // default derives from paradigm
  bool padded = false;

  SchedulePolicy schedule_policy() const;
};

/// Hand-authored surrogate for library tilings. Lookup falls back to the
/// entry whose architecture is nearest in compute capability.
class TilingTable {
 public:
  TilingTable() = default;
  explicit TilingTable(std::vector<TilingEntry> entries);

  static TilingTable builtin();
  static TilingTable load(const std::filesystem::path& path);
  static TilingTable from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  const TilingEntry& lookup(KernelCategory category, Precision precision,
                            double compute_capability,
                            std::string_view variant = {}) const;
  const TilingEntry& lookup(const KernelParams& params, double compute_capability) const;

  const std::vector<TilingEntry>& entries() const { return entries_; }

 private:
  std::vector<TilingEntry> entries_;
};

}  // namespace gpuperf
