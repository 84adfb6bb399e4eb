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

#include "gpuperf/common.hpp"

#include <string>

namespace gpuperf {

std::string_view to_string(Precision p) {
  switch (p) {
    case Precision::FP8: return "fp8";
    case Precision::BF16: return "bf16";
    case Precision::FP16: return "fp16";
    case Precision::FP32: return "fp32";
  }
  return "?";
}

Precision parse_precision(std::string_view s) {
  if (s == "fp8" || s == "fp8_e4m3" || s == "e4m3") return Precision::FP8;
  if (s == "bf16") return Precision::BF16;
  if (s == "fp16" || s == "half") return Precision::FP16;
  if (s == "fp32" || s == "float" || s == "tf32") return Precision::FP32;
  throw Error("unknown precision tag '" + std::string(s) + "'");
}

int bytes_per_element(Precision p) {
  switch (p) {
    case Precision::FP8: return 1;
    case Precision::BF16:
    case Precision::FP16: return 2;
    case Precision::FP32: return 4;
  }
  return 0;
}

std::string_view to_string(Pipeline p) {
  switch (p) {
    case Pipeline::Tensor: return "tensor";
    case Pipeline::FMA: return "fma";
    case Pipeline::XU: return "xu";
  }
  return "?";
}

std::string_view to_string(KernelCategory c) {
  switch (c) {
    case KernelCategory::Gemm: return "gemm";
    case KernelCategory::ScaledMM: return "scaled_mm";
    case KernelCategory::Attention: return "attention";
    case KernelCategory::RmsNorm: return "rmsnorm";
    case KernelCategory::SiluMul: return "silu_mul";
    case KernelCategory::FusedMoE: return "fused_moe";
  }
  return "?";
}

KernelCategory parse_category(std::string_view s) {
  for (auto c : kAllCategories) {
    if (to_string(c) == s) return c;
  }
  throw Error("unsupported kernel category '" + std::string(s) + "'");
}

}  // namespace gpuperf
