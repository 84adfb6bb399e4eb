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

#include "gpuperf/kernel_params.hpp"

#include <numeric>
#include <string>

#include <nlohmann/json.hpp>

namespace gpuperf {
namespace {

using json = nlohmann::json;

Count get_count(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(std::string("missing kernel parameter '") + key + "'");
  if (!it->is_number_integer()) {
    throw Error(std::string("kernel parameter '") + key + "' must be an integer");
  }
  return it->get<Count>();
}

std::vector<Count> get_lengths(const json& j, const char* key, Count bs) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(std::string("missing kernel parameter '") + key + "'");
  if (it->is_number_integer()) return std::vector<Count>(static_cast<std::size_t>(bs), it->get<Count>());
  if (!it->is_array()) throw Error(std::string("kernel parameter '") + key + "' must be a list");
  std::vector<Count> out;
  for (const auto& v : *it) {
    if (!v.is_number_integer()) throw Error(std::string("'") + key + "' entries must be integers");
    out.push_back(v.get<Count>());
  }
  return out;
}

void require_at_least_one(Count v, const char* what) {
  if (v < 1) throw Error(std::string(what) + " must be >= 1");
}

}  // namespace

std::vector<Count> FusedMoeShape::tokens_per_expert() const {
  if (!expert_tokens.empty()) return expert_tokens;
  std::vector<Count> out(static_cast<std::size_t>(experts));
  Count total = m * topk;
  for (Count e = 0; e < experts; ++e) {
    out[static_cast<std::size_t>(e)] = total / experts + (e < total % experts ? 1 : 0);
  }
  return out;
}

KernelCategory KernelParams::category() const {
  return std::visit(
      [](const auto& s) -> KernelCategory {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GemmShape>) return KernelCategory::Gemm;
        if constexpr (std::is_same_v<T, ScaledMmShape>) return KernelCategory::ScaledMM;
        if constexpr (std::is_same_v<T, AttentionShape>) return KernelCategory::Attention;
        if constexpr (std::is_same_v<T, RmsNormShape>) return KernelCategory::RmsNorm;
        if constexpr (std::is_same_v<T, SiluMulShape>) return KernelCategory::SiluMul;
        if constexpr (std::is_same_v<T, FusedMoeShape>) return KernelCategory::FusedMoE;
      },
      shape);
}

Precision default_precision(KernelCategory c) {
  return c == KernelCategory::ScaledMM ? Precision::FP8 : Precision::BF16;
}

void validate(const KernelParams& p) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GemmShape> || std::is_same_v<T, ScaledMmShape>) {
          require_at_least_one(s.m, "M");
          require_at_least_one(s.n, "N");
          require_at_least_one(s.k, "K");
        } else if constexpr (std::is_same_v<T, AttentionShape>) {
          require_at_least_one(s.num_heads, "nh");
          require_at_least_one(s.num_kv_heads, "nkv");
          require_at_least_one(s.head_dim, "hd");
          if (s.num_heads % s.num_kv_heads != 0) throw Error("nh must be divisible by nkv");
          if (s.qlens.empty()) throw Error("attention batch must hold at least one sequence");
          if (s.qlens.size() != s.kvlens.size()) throw Error("qlen and kvlen lists differ in length");
          for (std::size_t i = 0; i < s.qlens.size(); ++i) {
            require_at_least_one(s.qlens[i], "qlen");
            require_at_least_one(s.kvlens[i], "kvlen");
            if (s.causal && s.kvlens[i] < s.qlens[i]) {
              throw Error("causal attention requires kvlen >= qlen for every sequence");
            }
          }
        } else if constexpr (std::is_same_v<T, RmsNormShape> || std::is_same_v<T, SiluMulShape>) {
          require_at_least_one(s.seq, "seq");
          require_at_least_one(s.dim, "dim");
        } else if constexpr (std::is_same_v<T, FusedMoeShape>) {
          require_at_least_one(s.m, "M");
          require_at_least_one(s.experts, "E");
          require_at_least_one(s.topk, "topk");
          require_at_least_one(s.hidden, "H");
          require_at_least_one(s.n, "N");
          if (s.topk > s.experts) throw Error("topk must not exceed E");
          if (!s.expert_tokens.empty()) {
            if (static_cast<Count>(s.expert_tokens.size()) != s.experts) {
              throw Error("expert_tokens must have E entries");
            }
            Count sum = 0;
            for (Count t : s.expert_tokens) {
              if (t < 0) throw Error("expert_tokens entries must be >= 0");
              sum += t;
            }
            if (sum != s.m * s.topk) throw Error("expert_tokens must sum to M*topk");
          }
        }
      },
      p.shape);
}

KernelParams params_from_json(KernelCategory c, const json& j, std::optional<Precision> precision) {
  if (!j.is_object()) throw Error("kernel params must be a JSON object");
  KernelParams p;
  p.precision = precision.value_or(default_precision(c));
  switch (c) {
    case KernelCategory::Gemm:
      p.shape = GemmShape{get_count(j, "M"), get_count(j, "N"), get_count(j, "K")};
      break;
    case KernelCategory::ScaledMM:
      p.shape = ScaledMmShape{get_count(j, "M"), get_count(j, "N"), get_count(j, "K")};
      break;
    case KernelCategory::Attention: {
      AttentionShape a;
      a.num_heads = get_count(j, "nh");
      a.num_kv_heads = j.contains("nkv") ? get_count(j, "nkv") : a.num_heads;
      a.head_dim = get_count(j, "hd");
      Count bs = j.contains("bs") ? get_count(j, "bs") : 1;
      a.qlens = get_lengths(j, "qlen", bs);
      a.kvlens = get_lengths(j, "kvlen", bs);
      if (j.contains("bs") && static_cast<Count>(a.qlens.size()) != bs) {
        throw Error("bs does not match the number of qlen entries");
      }
      a.causal = j.value("causal", true);
      std::string variant = j.value("variant", std::string("fa2"));
      if (variant == "fa2") {
        a.variant = AttentionVariant::FA2;
      } else if (variant == "fa3") {
        a.variant = AttentionVariant::FA3;
      } else {
        throw Error("attention variant must be 'fa2' or 'fa3'");
      }
      p.shape = std::move(a);
      break;
    }
    case KernelCategory::RmsNorm:
      p.shape = RmsNormShape{get_count(j, "seq"), get_count(j, "dim")};
      break;
    case KernelCategory::SiluMul:
      p.shape = SiluMulShape{get_count(j, "seq"), get_count(j, "dim")};
      break;
    case KernelCategory::FusedMoE: {
      FusedMoeShape f;
      f.m = get_count(j, "M");
      f.experts = get_count(j, "E");
      f.topk = get_count(j, "topk");
      f.hidden = get_count(j, "H");
      f.n = get_count(j, "N");
      if (j.contains("expert_tokens")) f.expert_tokens = get_lengths(j, "expert_tokens", 0);
      p.shape = std::move(f);
      break;
    }
  }
  validate(p);
  return p;
}

json params_to_json(const KernelParams& p) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GemmShape> || std::is_same_v<T, ScaledMmShape>) {
          return json{{"M", s.m}, {"N", s.n}, {"K", s.k}};
        } else if constexpr (std::is_same_v<T, AttentionShape>) {
          return json{{"bs", s.batch()},
                      {"nh", s.num_heads},
                      {"nkv", s.num_kv_heads},
                      {"hd", s.head_dim},
                      {"qlen", s.qlens},
                      {"kvlen", s.kvlens},
                      {"causal", s.causal},
                      {"variant", s.variant == AttentionVariant::FA2 ? "fa2" : "fa3"}};
        } else if constexpr (std::is_same_v<T, RmsNormShape> || std::is_same_v<T, SiluMulShape>) {
          return json{{"seq", s.seq}, {"dim", s.dim}};
        } else {
          json j{{"M", s.m}, {"E", s.experts}, {"topk", s.topk}, {"H", s.hidden}, {"N", s.n}};
          if (!s.expert_tokens.empty()) j["expert_tokens"] = s.expert_tokens;
          return j;
        }
      },
      p.shape);
}

}  // namespace gpuperf
