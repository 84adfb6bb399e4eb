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

// Brute-force reference implementations. They only read the plain parameter
// structs and never call into the decomposer, scheduler or nn code.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "gpuperf/kernel_params.hpp"

namespace oracle {

struct OpCounts {
  std::int64_t tensor = 0;
  std::int64_t fma = 0;
  std::int64_t xu = 0;
};

/// Largest instance brute_ops accepts, in output elements.
inline constexpr std::int64_t kMaxOutputElements = std::int64_t{1} << 24;

/// Counts operations by literally enumerating the arithmetic. Throws
/// std::length_error when the instance is too large.
OpCounts brute_ops(const gpuperf::KernelParams& params);

/// Number of score elements a causal (or full) attention head computes.
std::int64_t attention_score_elements(std::int64_t qlen, std::int64_t kvlen, bool causal);

struct EventResult {
  std::vector<std::vector<std::size_t>> assignments;  // task ids per SM
  std::vector<double> loads;                          // summed cost per SM
};

/// Discrete-event simulation of CTA dispatch: every SM holds `occupancy`
/// independent slots; tasks are dealt cyclically while every SM has a free
/// slot, then each remaining task goes to the SM whose slot frees first.
/// Simultaneous retirements are served round-robin.
EventResult event_schedule(std::span<const double> costs, int num_sms, int occupancy);

/// Central finite differences of `loss` with respect to every entry of
/// `param`, which is perturbed in place and restored.
std::vector<double> numeric_gradient(const std::function<double()>& loss, std::span<double> param,
                                     double step);

}  // namespace oracle
