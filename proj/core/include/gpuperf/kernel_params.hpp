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

#include <optional>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gpuperf/common.hpp"

namespace gpuperf {

struct GemmShape {
  Count m = 1, n = 1, k = 1;
};

/// FP8 GEMM with per-token / per-channel dequantization scales.
struct ScaledMmShape {
  Count m = 1, n = 1, k = 1;
};

enum class AttentionVariant { FA2, FA3 };

/// Ragged batch: one (qlen, kvlen) pair per sequence.
struct AttentionShape {
  Count num_heads = 1;
  Count num_kv_heads = 1;
  Count head_dim = 128;
  std::vector<Count> qlens;
  std::vector<Count> kvlens;
  bool causal = true;
  AttentionVariant variant = AttentionVariant::FA2;

  Count batch() const { return static_cast<Count>(qlens.size()); }
  Count group_size() const { return num_heads / num_kv_heads; }
};

struct RmsNormShape {
  Count seq = 1, dim = 1;
};

/// `dim` is the output width (the input row holds gate and up halves).
struct SiluMulShape {
  Count seq = 1, dim = 1;
};

struct FusedMoeShape {
  Count m = 1;      // tokens
  Count experts = 1;
  Count topk = 1;
  Count hidden = 1; // reduction extent H
  Count n = 1;      // output width per expert
  std::vector<Count> expert_tokens;  // optional routing histogram

  /// Per-expert token counts: the histogram when present, otherwise
  /// M*topk spread evenly with the remainder on the lowest experts.
  std::vector<Count> tokens_per_expert() const;
};

using KernelShape = std::variant<GemmShape, ScaledMmShape, AttentionShape, RmsNormShape,
                                 SiluMulShape, FusedMoeShape>;

struct KernelParams {
  KernelShape shape;
  Precision precision = Precision::BF16;

  KernelCategory category() const;
};

Precision default_precision(KernelCategory c);

/// Throws Error naming the violated invariant.
void validate(const KernelParams& p);

/// Dataset/CLI params object, e.g. {"M":4096,"N":4096,"K":4096}.
KernelParams params_from_json(KernelCategory c, const nlohmann::json& params,
                              std::optional<Precision> precision = std::nullopt);
nlohmann::json params_to_json(const KernelParams& p);

}  // namespace gpuperf
