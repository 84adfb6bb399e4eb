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
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gpuperf {

/// Raised for every input/data/validation problem (bad files, violated
/// preconditions, unsupported combinations). Programming errors use the
/// standard exception types instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Precision { FP8, BF16, FP16, FP32 };

std::string_view to_string(Precision p);
Precision parse_precision(std::string_view s);
int bytes_per_element(Precision p);

/// Math pipelines in canonical feature order.
enum class Pipeline { Tensor = 0, FMA = 1, XU = 2 };
inline constexpr std::size_t kNumPipelines = 3;
inline constexpr std::array<Pipeline, kNumPipelines> kAllPipelines = {
    Pipeline::Tensor, Pipeline::FMA, Pipeline::XU};

std::string_view to_string(Pipeline p);

enum class KernelCategory { Gemm, ScaledMM, Attention, RmsNorm, SiluMul, FusedMoE };
inline constexpr std::array<KernelCategory, 6> kAllCategories = {
    KernelCategory::Gemm,    KernelCategory::ScaledMM, KernelCategory::Attention,
    KernelCategory::RmsNorm, KernelCategory::SiluMul,  KernelCategory::FusedMoE};

std::string_view to_string(KernelCategory c);
KernelCategory parse_category(std::string_view s);

/// Integer operation / byte counts. Signed so that differences are safe.
using Count = std::int64_t;

}  // namespace gpuperf
