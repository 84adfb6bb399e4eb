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

#include <array>
#include <optional>
#include <vector>

#include "gpuperf/common.hpp"
#include "gpuperf/hwspec.hpp"
#include "gpuperf/kernel_params.hpp"
#include "gpuperf/tiling.hpp"

namespace gpuperf {

/// Multiply-add operations per output element.
inline constexpr int kMatmulAlpha = 2;     // one matrix product
inline constexpr int kAttentionAlpha = 4;  // QK^T followed by PV

/// Fixed per-element operation counts for the elementwise kernels. These
/// approximate the library implementations and can be recalibrated here.
struct ElementwiseOpCounts {
  Count rmsnorm_fma_per_element = 3;  // square-accumulate, 1/rms scale, weight
  Count rmsnorm_xu_per_row = 1;       // rsqrt
  Count silu_mul_fma_per_element = 4;
  Count silu_mul_xu_per_element = 1;  // exp
};
inline constexpr ElementwiseOpCounts kElementwiseOps{};

/// Dimensional parameters of one task. Matmul-like tasks execute a
/// tile_m x tile_n x tile_k product; attention uses tile_m = packed query
/// rows, tile_n = kv_eff, tile_k = head_dim; elementwise tasks use `rows`.
struct TaskDims {
  Count tile_m = 0;
  Count tile_n = 0;
  Count tile_k = 0;
  Count kv_eff = 0;
  Count rows = 0;
};

struct Task {
  Count id = 0;
  /// Launch-grid coordinate: gemm (tile_row, tile_col, -), attention
  /// (sequence, kv_head, q_block), fused_moe (expert, tile_row, tile_col),
  /// elementwise (row_block, -, -).
  std::array<Count, 3> coord{};
  TaskDims dims;
  std::optional<int> alpha;
  std::array<Count, kNumPipelines> ops{};
  Count load_bytes = 0;
  Footprint footprint;

  Count ops_on(Pipeline p) const { return ops[static_cast<std::size_t>(p)]; }
};

struct TaskSet {
  std::vector<Task> tasks;
  KernelCategory category = KernelCategory::Gemm;
  Precision precision = Precision::BF16;
  ExecutionParadigm paradigm = ExecutionParadigm::ConventionalCTA;
  SchedulePolicy policy = SchedulePolicy::RoundRobin;
  int occupancy_limit = 1;
};

struct OccupancyLimit {
  int tasks_per_sm = 1;
  bool clamped = false;  // some single requirement exceeds the SM
};

/// Concurrent tasks per SM allowed by shared memory, registers, warp slots
/// and the CTA slot limit. Zero requirements are unconstrained.
OccupancyLimit occupancy_limit(const Footprint& footprint, const HardwareSpec& spec);
inline OccupancyLimit occupancy_limit(const Task& task, const HardwareSpec& spec) {
  return occupancy_limit(task.footprint, spec);
}

/// Maps kernel parameters and a device to the kernel's full task set in
/// launch-grid order (row-major output tiles; attention by sequence, head
/// group, query block; fused MoE expert-major).
TaskSet decompose(const KernelParams& params, const HardwareSpec& spec,
                  const TilingTable& tiling);

/// Same, with an explicit tiling entry (bypasses the table lookup).
TaskSet decompose(const KernelParams& params, const HardwareSpec& spec,
                  const TilingEntry& entry);

/// Effective KV extent of an attention task whose packed query rows end at
/// `row_end` (exclusive), where `group` query heads share each position.
/// Causal extents are rounded up to `kv_block` and capped at kvlen.
Count attention_kv_extent(Count qlen, Count kvlen, bool causal, Count group, Count row_end,
                          Count kv_block);

}  // namespace gpuperf
