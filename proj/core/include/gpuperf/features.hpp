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
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gpuperf/decomposer.hpp"
#include "gpuperf/hwspec.hpp"
#include "gpuperf/scheduler.hpp"

namespace gpuperf {

/// Theoretical cycles of one task if each pipeline alone were the
/// bottleneck; `shared` is the task's load traffic through shared memory.
struct TaskCycles {
  double tensor = 0.0;
  double fma = 0.0;
  double xu = 0.0;
  double shared = 0.0;

  double on(Pipeline p) const;
};

TaskCycles task_cycles(const Task& task, Precision precision, const HardwareSpec& spec);

/// Math pipelines exercised by a kernel category, in canonical order.
std::vector<Pipeline> pipelines_for(KernelCategory category);

/// Kernel-level analytical features. Math entries are kept for every
/// pipeline; only those in `pipelines` are exported by values()/layout.
struct FeatureVector {
  KernelCategory category = KernelCategory::Gemm;
  std::vector<Pipeline> pipelines;

  std::array<Count, kNumPipelines> total_ops{};
  std::array<double, kNumPipelines> total_cycles{};
  std::array<Count, kNumPipelines> max_sm_ops{};
  std::array<double, kNumPipelines> max_sm_cycles{};

  Count total_bytes = 0;
  double cycles_global_gpu = 0.0;
  double cycles_l2_gpu = 0.0;
  Count max_sm_bytes = 0;
  double cycles_global_max_sm = 0.0;
  double cycles_l2_max_sm = 0.0;
  double cycles_shared_max_sm = 0.0;

  /// Binding GPU-level roof, in microseconds.
  double theoretical_time_us = 0.0;

  Count total_ops_on(Pipeline p) const { return total_ops[static_cast<std::size_t>(p)]; }
  double total_cycles_on(Pipeline p) const { return total_cycles[static_cast<std::size_t>(p)]; }
  Count max_sm_ops_on(Pipeline p) const { return max_sm_ops[static_cast<std::size_t>(p)]; }
  double max_sm_cycles_on(Pipeline p) const { return max_sm_cycles[static_cast<std::size_t>(p)]; }

  /// Values in feature_layout(category) order.
  std::vector<double> values() const;
};

/// Frozen feature order used for model serialization: four entries per
/// pipeline of the category, then seven memory entries.
std::vector<std::string> feature_layout(KernelCategory category);

/// Aggregates task demands per SM and per GPU. `dist` must partition `ts`.
FeatureVector analyze(const TaskSet& ts, const TaskDistribution& dist, const HardwareSpec& spec);

nlohmann::json to_json(const FeatureVector& fv);

}  // namespace gpuperf
