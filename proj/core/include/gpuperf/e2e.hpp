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
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gpuperf/estimator.hpp"
#include "gpuperf/hwspec.hpp"
#include "gpuperf/kernel_params.hpp"
#include "gpuperf/tiling.hpp"

namespace gpuperf {

struct MoeConfig {
  Count experts = 0;
  Count topk = 0;
};

/// SwiGLU decoder-only transformer.
struct ModelConfig {
  std::string name;
  Count num_layers = 0;
  Count hidden_size = 0;
  Count num_heads = 0;
  Count num_kv_heads = 0;
  Count head_dim = 0;
  Count intermediate_size = 0;  // per expert for MoE models
  Count vocab_size = 0;
  std::optional<MoeConfig> moe;
  Precision precision = Precision::BF16;

  /// Throws Error naming the violated invariant.
  void validate() const;

  static ModelConfig from_json(const nlohmann::json& j);
  static ModelConfig load(const std::filesystem::path& path);
  nlohmann::json to_json() const;
};

struct ParallelConfig {
  int tp = 1;
  int pp = 1;
  std::string link = "nvlink";
  /// When tp exceeds num_kv_heads, replicate KV heads across ranks.
  bool replicate_kv = false;
};

struct Request {
  Count input_len = 0;
  Count output_len = 0;
};

struct PhasePlan {
  bool prefill = true;
  /// Decode steps to emit; defaults to the longest output_len.
  std::optional<Count> decode_steps;
  AttentionVariant attention_variant = AttentionVariant::FA2;
};

enum class Collective { AllReduce, SendRecv };
std::string_view to_string(Collective c);
Collective parse_collective(std::string_view s);

struct CommCall {
  Collective collective = Collective::AllReduce;
  int world_size = 2;
  Count bytes = 0;

  friend bool operator==(const CommCall&, const CommCall&) = default;
};

struct Invocation {
  std::string phase;  // "prefill" or "decode-<k>"
  std::string op;     // e.g. "qkv_proj", "allreduce"
  int layer = -1;     // -1 for the model head
  std::variant<KernelParams, CommCall> call;

  bool is_comm() const { return std::holds_alternative<CommCall>(call); }
  /// Kernel category name or collective name.
  std::string kind() const;
};

using KernelTrace = std::vector<Invocation>;

/// Layers per pipeline stage, contiguous, remainder to the early stages.
std::vector<Count> stage_layers(Count num_layers, int pp);

KernelTrace generate_trace(const ModelConfig& m, const ParallelConfig& p,
                           const std::vector<Request>& batch, const PhasePlan& plan = {});

nlohmann::json to_json(const Invocation& inv);
Invocation invocation_from_json(const nlohmann::json& j);
void write_trace(std::ostream& out, const KernelTrace& trace);
KernelTrace load_trace(const std::filesystem::path& path);

/// Calibration points (bytes, latency_us) for one collective on one link.
struct CommTable {
  Collective collective = Collective::AllReduce;
  int world_size = 2;
  std::string link;
  std::vector<std::pair<double, double>> points;  // ascending bytes
};

class CommModel {
 public:
  CommModel() = default;
  explicit CommModel(std::vector<CommTable> tables);

  static CommModel from_json(const nlohmann::json& j);
  static CommModel load(const std::filesystem::path& path);
  nlohmann::json to_json() const;

  const CommTable& table(Collective c, int world_size, const std::string& link) const;
  const std::vector<CommTable>& tables() const { return tables_; }

 private:
  std::vector<CommTable> tables_;
};

/// Piecewise-linear in log(bytes); flat beyond either end.
double predict_comm(const CommModel& cm, Collective c, int world_size, double bytes,
                    const std::string& link);

/// Alpha-beta calibration table at powers of two from min_bytes to
/// max_bytes. AllReduce uses the ring cost 2(w-1)*alpha + 2(w-1)/w * B/bw.
CommTable alpha_beta_table(Collective c, int world_size, const std::string& link,
                           double alpha_us, double bw_gbps, double min_bytes = 1024.0,
                           double max_bytes = 4294967296.0);

/// Correctly rounded sum, independent of the order of `values`.
double exact_sum(std::span<const double> values);

struct BreakdownEntry {
  std::size_t index = 0;
  std::string phase;
  std::string op;
  std::string kind;
  double latency_us = 0.0;
};

struct E2EResult {
  double total_us = 0.0;  // exact_sum of the breakdown latencies
  double compute_us = 0.0;
  double comm_us = 0.0;
  std::vector<BreakdownEntry> breakdown;  // trace order
  std::map<std::string, double> shares;   // kind -> fraction of total
};

using EstimatorSet = std::map<KernelCategory, Estimator>;

struct E2EContext {
  const EstimatorSet* estimators = nullptr;
  const HardwareSpec* hw = nullptr;
  const TilingTable* tiling = nullptr;
  const CommModel* comm = nullptr;
  std::string link = "nvlink";
};

/// Sequential-execution latency of a trace. Identical kernel invocations
/// are predicted once.
E2EResult predict_e2e(const KernelTrace& trace, const E2EContext& ctx);

void write_breakdown_csv(std::ostream& out, const E2EResult& r);
nlohmann::json to_json(const E2EResult& r);

}  // namespace gpuperf
