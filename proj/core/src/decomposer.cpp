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

#include "gpuperf/decomposer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gpuperf/diag.hpp"

namespace gpuperf {
namespace {

constexpr Count ceil_div(Count a, Count b) { return (a + b - 1) / b; }
constexpr Count round_up(Count a, Count b) { return ceil_div(a, b) * b; }

constexpr Count kScaleBytes = 4;  // fp32 dequantization scale

void set_ops(Task& t, Pipeline p, Count v) { t.ops[static_cast<std::size_t>(p)] = v; }

class Builder {
 public:
  Builder(const TilingEntry& entry, Precision precision)
      : entry_(entry), bpe_(bytes_per_element(precision)) {}

  Task& next(std::array<Count, 3> coord) {
    Task& t = tasks_.emplace_back();
    t.id = static_cast<Count>(tasks_.size() - 1);
    t.coord = coord;
    t.footprint = entry_.footprint;
    return t;
  }

  // One output tile of a (possibly scaled) matmul with full K extent.
  void matmul_tile(std::array<Count, 3> coord, Count rows, Count cols, Count k, bool scaled) {
    Task& t = next(coord);
    const Count mma_m = entry_.padded ? entry_.tile_m : rows;
    const Count mma_n = entry_.padded ? entry_.tile_n : cols;
    t.dims.tile_m = mma_m;
    t.dims.tile_n = mma_n;
    t.dims.tile_k = k;
    t.dims.rows = rows;
    t.alpha = kMatmulAlpha;
    set_ops(t, Pipeline::Tensor, kMatmulAlpha * mma_m * mma_n * k);
    t.load_bytes = (rows + cols) * k * bpe_;
    if (scaled) {
      set_ops(t, Pipeline::FMA, rows * cols);
      t.load_bytes += (rows + cols) * kScaleBytes;
    }
  }

  std::vector<Task> take() { return std::move(tasks_); }
  Count bpe() const { return bpe_; }
  const TilingEntry& entry() const { return entry_; }

 private:
  const TilingEntry& entry_;
  Count bpe_;
  std::vector<Task> tasks_;
};

void decompose_matmul(Builder& b, Count m, Count n, Count k, bool scaled) {
  const Count tm = b.entry().tile_m;
  const Count tn = b.entry().tile_n;
  for (Count i = 0; i < ceil_div(m, tm); ++i) {
    const Count rows = std::min(tm, m - i * tm);
    for (Count j = 0; j < ceil_div(n, tn); ++j) {
      b.matmul_tile({i, j, 0}, rows, std::min(tn, n - j * tn), k, scaled);
    }
  }
}

void decompose_attention(Builder& b, const AttentionShape& a) {
  const Count q_block = b.entry().q_block.value_or(b.entry().tile_m);
  const Count kv_block = b.entry().kv_block.value_or(b.entry().tile_n);
  const Count group = a.group_size();
  const Count hd = a.head_dim;
  for (Count s = 0; s < a.batch(); ++s) {
    const Count qlen = a.qlens[static_cast<std::size_t>(s)];
    const Count kvlen = a.kvlens[static_cast<std::size_t>(s)];
    // Query heads of one KV group are packed into the row dimension, so
    // each task loads its group's K/V once.
    const Count packed_rows = qlen * group;
    for (Count h = 0; h < a.num_kv_heads; ++h) {
      for (Count qb = 0; qb < ceil_div(packed_rows, q_block); ++qb) {
        const Count row_begin = qb * q_block;
        const Count row_end = std::min(packed_rows, row_begin + q_block);
        const Count rows = row_end - row_begin;
        const Count kv_eff =
            attention_kv_extent(qlen, kvlen, a.causal, group, row_end, kv_block);
        Task& t = b.next({s, h, qb});
        t.dims.tile_m = rows;
        t.dims.tile_n = kv_eff;
        t.dims.tile_k = hd;
        t.dims.kv_eff = kv_eff;
        t.dims.rows = rows;
        t.alpha = kAttentionAlpha;
        set_ops(t, Pipeline::Tensor, kAttentionAlpha * rows * kv_eff * hd);
        set_ops(t, Pipeline::XU, rows * kv_eff);  // one exp2 per score
        t.load_bytes = (rows * hd + 2 * kv_eff * hd) * b.bpe();
      }
    }
  }
}

void decompose_rmsnorm(Builder& b, const RmsNormShape& r) {
  const Count block = b.entry().tile_m;
  for (Count i = 0; i < ceil_div(r.seq, block); ++i) {
    const Count rows = std::min(block, r.seq - i * block);
    Task& t = b.next({i, 0, 0});
    t.dims.rows = rows;
    t.dims.tile_n = r.dim;
    set_ops(t, Pipeline::FMA, kElementwiseOps.rmsnorm_fma_per_element * r.dim * rows);
    set_ops(t, Pipeline::XU, kElementwiseOps.rmsnorm_xu_per_row * rows);
    t.load_bytes = (rows + 1) * r.dim * b.bpe();  // rows + shared weight vector
  }
}

void decompose_silu_mul(Builder& b, const SiluMulShape& s) {
  const Count block = b.entry().tile_m;
  for (Count i = 0; i < ceil_div(s.seq, block); ++i) {
    const Count rows = std::min(block, s.seq - i * block);
    Task& t = b.next({i, 0, 0});
    t.dims.rows = rows;
    t.dims.tile_n = s.dim;
    set_ops(t, Pipeline::FMA, kElementwiseOps.silu_mul_fma_per_element * s.dim * rows);
    set_ops(t, Pipeline::XU, kElementwiseOps.silu_mul_xu_per_element * s.dim * rows);
    t.load_bytes = 2 * s.dim * rows * b.bpe();  // gate and up halves
  }
}

void decompose_fused_moe(Builder& b, const FusedMoeShape& f) {
  const Count tm = b.entry().tile_m;
  const Count tn = b.entry().tile_n;
  const auto tokens = f.tokens_per_expert();
  for (Count e = 0; e < f.experts; ++e) {
    const Count te = tokens[static_cast<std::size_t>(e)];
    for (Count i = 0; i < ceil_div(te, tm); ++i) {
      const Count rows = std::min(tm, te - i * tm);
      for (Count j = 0; j < ceil_div(f.n, tn); ++j) {
        b.matmul_tile({e, i, j}, rows, std::min(tn, f.n - j * tn), f.hidden, false);
      }
    }
  }
}

}  // namespace

Count attention_kv_extent(Count qlen, Count kvlen, bool causal, Count group, Count row_end,
                          Count kv_block) {
  if (!causal) return kvlen;
  // Last query position in the block attends to keys [0, kvlen - qlen + pos].
  const Count last_pos = (row_end - 1) / group;
  const Count needed = kvlen - qlen + last_pos + 1;
  return std::min(kvlen, round_up(needed, kv_block));
}

OccupancyLimit occupancy_limit(const Footprint& fp, const HardwareSpec& spec) {
  Count limit = spec.max_ctas_per_sm;
  auto apply = [&](Count available, Count per_task) {
    if (per_task > 0) limit = std::min(limit, available / per_task);
  };
  apply(static_cast<Count>(std::llround(spec.smem_size_per_sm_kib * 1024.0)), fp.smem_bytes);
  const Count regfile_bytes = static_cast<Count>(std::llround(spec.regfile_size_per_sm_kib * 1024.0));
  apply(regfile_bytes, Count{fp.regs_per_thread} * 4 * 32 * fp.warps);  // 32-bit registers
  apply(spec.max_warps_per_sm, fp.warps);

  OccupancyLimit out;
  if (limit < 1) {
    std::ostringstream os;
    os << "task footprint (smem " << fp.smem_bytes << " B, " << fp.regs_per_thread
       << " regs x " << fp.warps << " warps) exceeds one SM of " << spec.name
       << "; occupancy clamped to 1";
    warn(os.str());
    out.clamped = true;
    limit = 1;
  }
  out.tasks_per_sm = static_cast<int>(limit);
  return out;
}

TaskSet decompose(const KernelParams& params, const HardwareSpec& spec, const TilingTable& tiling) {
  return decompose(params, spec, tiling.lookup(params, spec.compute_capability));
}

TaskSet decompose(const KernelParams& params, const HardwareSpec& spec, const TilingEntry& entry) {
  validate(params);
  if (entry.category != params.category()) {
    throw Error("tiling entry category does not match kernel category");
  }
  if (params.category() != KernelCategory::RmsNorm &&
      params.category() != KernelCategory::SiluMul &&
      !spec.throughput(Pipeline::Tensor, params.precision)) {
    throw Error(spec.name + " has no tensor throughput for precision " +
                std::string(to_string(params.precision)));
  }

  Builder b(entry, params.precision);
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GemmShape>) {
          decompose_matmul(b, s.m, s.n, s.k, false);
        } else if constexpr (std::is_same_v<T, ScaledMmShape>) {
          decompose_matmul(b, s.m, s.n, s.k, true);
        } else if constexpr (std::is_same_v<T, AttentionShape>) {
          decompose_attention(b, s);
        } else if constexpr (std::is_same_v<T, RmsNormShape>) {
          decompose_rmsnorm(b, s);
        } else if constexpr (std::is_same_v<T, SiluMulShape>) {
          decompose_silu_mul(b, s);
        } else {
          decompose_fused_moe(b, s);
        }
      },
      params.shape);

  TaskSet ts;
  ts.tasks = b.take();
  if (ts.tasks.empty()) throw Error("decomposition produced zero tasks");
  ts.category = params.category();
  ts.precision = params.precision;
  ts.paradigm = entry.paradigm;
  ts.policy = entry.schedule_policy();
  ts.occupancy_limit = occupancy_limit(entry.footprint, spec).tasks_per_sm;
  return ts;
}

}  // namespace gpuperf
