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

#include "gpuperf/tiling.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

namespace gpuperf {
namespace {

using json = nlohmann::json;

// Default geometry. Library kernels (cuBLAS) are closed source, so these
// are plausible stand-ins rather than calibrated values.
constexpr const char* kBuiltinTable = R"([
  {"category": "gemm", "precision": "*", "arch": "8.0", "tile_m": 128, "tile_n": 128, "tile_k": 32,
   "smem_bytes": 49152, "regs_per_thread": 128, "warps": 8, "paradigm": "conventional", "padded": false},
  {"category": "gemm", "precision": "*", "arch": "8.6", "tile_m": 128, "tile_n": 128, "tile_k": 32,
   "smem_bytes": 49152, "regs_per_thread": 128, "warps": 8, "paradigm": "conventional", "padded": false},
  {"category": "gemm", "precision": "*", "arch": "8.9", "tile_m": 128, "tile_n": 128, "tile_k": 32,
   "smem_bytes": 65536, "regs_per_thread": 128, "warps": 8, "paradigm": "conventional", "padded": false},
  {"category": "gemm", "precision": "*", "arch": "9.0", "tile_m": 128, "tile_n": 256, "tile_k": 64,
   "smem_bytes": 196608, "regs_per_thread": 168, "warps": 12, "paradigm": "persistent",
   "scheduler": "striped", "padded": false},
  {"category": "gemm", "precision": "*", "arch": "12.0", "tile_m": 128, "tile_n": 128, "tile_k": 64,
   "smem_bytes": 98304, "regs_per_thread": 128, "warps": 8, "paradigm": "conventional", "padded": false},
  {"category": "scaled_mm", "precision": "*", "arch": "8.9", "tile_m": 128, "tile_n": 128, "tile_k": 64,
   "smem_bytes": 65536, "regs_per_thread": 128, "warps": 8, "paradigm": "conventional", "padded": false},
  {"category": "scaled_mm", "precision": "*", "arch": "9.0", "tile_m": 128, "tile_n": 128, "tile_k": 128,
   "smem_bytes": 163840, "regs_per_thread": 168, "warps": 12, "paradigm": "persistent",
   "scheduler": "striped", "padded": false},
  {"category": "attention", "variant": "fa2", "precision": "*", "arch": "8.0", "q_block": 128, "kv_block": 64,
   "tile_m": 128, "tile_n": 64, "smem_bytes": 65536, "regs_per_thread": 255, "warps": 4,
   "paradigm": "conventional", "padded": false},
  {"category": "attention", "variant": "fa3", "precision": "*", "arch": "9.0", "q_block": 128, "kv_block": 128,
   "tile_m": 128, "tile_n": 128, "smem_bytes": 196608, "regs_per_thread": 168, "warps": 12,
   "paradigm": "persistent", "scheduler": "minheap", "padded": false},
  {"category": "rmsnorm", "precision": "*", "arch": "*", "tile_m": 1, "tile_n": 1,
   "smem_bytes": 0, "regs_per_thread": 32, "warps": 4, "paradigm": "conventional", "padded": false},
  {"category": "silu_mul", "precision": "*", "arch": "*", "tile_m": 1, "tile_n": 1,
   "smem_bytes": 0, "regs_per_thread": 32, "warps": 8, "paradigm": "conventional", "padded": false},
  {"category": "fused_moe", "precision": "*", "arch": "*", "tile_m": 64, "tile_n": 64, "tile_k": 32,
   "smem_bytes": 32768, "regs_per_thread": 128, "warps": 4, "paradigm": "conventional", "padded": false}
])";

ExecutionParadigm parse_paradigm(const std::string& s) {
  if (s == "conventional") return ExecutionParadigm::ConventionalCTA;
  if (s == "persistent") return ExecutionParadigm::Persistent;
  throw Error("tiling: unknown paradigm '" + s + "'");
}

SchedulePolicy parse_policy(const std::string& s) {
  if (s == "round_robin") return SchedulePolicy::RoundRobin;
  if (s == "minheap") return SchedulePolicy::MinHeap;
  if (s == "striped") return SchedulePolicy::Striped;
  throw Error("tiling: unknown scheduler '" + s + "'");
}

std::optional<Count> optional_count(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<Count>();
}

// Distance between an entry's architecture and the device. "*" matches
// anything but loses to any concrete architecture.
double arch_distance(const std::string& arch, double cc) {
  if (arch == "*") return 1e6;
  return std::fabs(std::stod(arch) - cc);
}

}  // namespace

std::string_view to_string(ExecutionParadigm p) {
  return p == ExecutionParadigm::Persistent ? "persistent" : "conventional";
}

std::string_view to_string(SchedulePolicy p) {
  switch (p) {
    case SchedulePolicy::RoundRobin: return "round_robin";
    case SchedulePolicy::MinHeap: return "minheap";
    case SchedulePolicy::Striped: return "striped";
  }
  return "?";
}

SchedulePolicy TilingEntry::schedule_policy() const {
  if (policy) return *policy;
  return paradigm == ExecutionParadigm::Persistent ? SchedulePolicy::Striped
                                                   : SchedulePolicy::RoundRobin;
}

TilingTable::TilingTable(std::vector<TilingEntry> entries) : entries_(std::move(entries)) {}

TilingTable TilingTable::builtin() { return from_json(json::parse(kBuiltinTable)); }

TilingTable TilingTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open tiling table '" + path.string() + "'");
  try {
    return from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

TilingTable TilingTable::from_json(const json& j) {
  if (!j.is_array()) throw Error("tiling table must be a JSON list");
  std::vector<TilingEntry> entries;
  for (const auto& e : j) {
    TilingEntry t;
    t.category = parse_category(e.at("category").get<std::string>());
    t.precision = e.value("precision", std::string("*"));
    if (t.precision != "*") parse_precision(t.precision);
    t.arch = e.value("arch", std::string("*"));
    if (t.arch != "*") {
      try {
        (void)std::stod(t.arch);
      } catch (const std::exception&) {
        throw Error("tiling: arch must be a compute capability or '*', got '" + t.arch + "'");
      }
    }
    t.variant = e.value("variant", std::string());
    t.tile_m = e.at("tile_m").get<Count>();
    t.tile_n = e.at("tile_n").get<Count>();
    t.tile_k = optional_count(e, "tile_k");
    t.q_block = optional_count(e, "q_block");
    t.kv_block = optional_count(e, "kv_block");
    t.footprint.smem_bytes = e.at("smem_bytes").get<Count>();
    t.footprint.regs_per_thread = e.at("regs_per_thread").get<int>();
    t.footprint.warps = e.at("warps").get<int>();
    t.paradigm = parse_paradigm(e.value("paradigm", std::string("conventional")));
    if (e.contains("scheduler")) t.policy = parse_policy(e.at("scheduler").get<std::string>());
    t.padded = e.value("padded", false);
    if (t.tile_m < 1 || t.tile_n < 1) throw Error("tiling: tile sizes must be >= 1");
    if ((t.q_block && *t.q_block < 1) || (t.kv_block && *t.kv_block < 1)) {
      throw Error("tiling: attention blocks must be >= 1");
    }
    entries.push_back(std::move(t));
  }
  return TilingTable(std::move(entries));
}

json TilingTable::to_json() const {
  json out = json::array();
  for (const auto& t : entries_) {
    json e{{"category", to_string(t.category)},
           {"precision", t.precision},
           {"arch", t.arch},
           {"tile_m", t.tile_m},
           {"tile_n", t.tile_n},
           {"smem_bytes", t.footprint.smem_bytes},
           {"regs_per_thread", t.footprint.regs_per_thread},
           {"warps", t.footprint.warps},
           {"paradigm", to_string(t.paradigm)},
           {"padded", t.padded}};
    if (!t.variant.empty()) e["variant"] = t.variant;
    if (t.tile_k) e["tile_k"] = *t.tile_k;
    if (t.q_block) e["q_block"] = *t.q_block;
    if (t.kv_block) e["kv_block"] = *t.kv_block;
    if (t.policy) e["scheduler"] = to_string(*t.policy);
    out.push_back(std::move(e));
  }
  return out;
}

const TilingEntry& TilingTable::lookup(KernelCategory category, Precision precision,
                                       double cc, std::string_view variant) const {
  const TilingEntry* best = nullptr;
  // (precision wildcard?, arch distance); lower is better, first wins ties.
  std::pair<int, double> best_score{std::numeric_limits<int>::max(), 0.0};
  for (const auto& e : entries_) {
    if (e.category != category) continue;
    if (!e.variant.empty() && !variant.empty() && e.variant != variant) continue;
    int prec_rank;
    if (e.precision == "*") {
      prec_rank = 1;
    } else if (parse_precision(e.precision) == precision) {
      prec_rank = 0;
    } else {
      continue;
    }
    std::pair<int, double> score{prec_rank, arch_distance(e.arch, cc)};
    if (!best || score < best_score) {
      best = &e;
      best_score = score;
    }
  }
  if (!best) {
    throw Error("no tiling entry for " + std::string(to_string(category)) + "/" +
                std::string(to_string(precision)));
  }
  return *best;
}

const TilingEntry& TilingTable::lookup(const KernelParams& params, double cc) const {
  std::string_view variant;
  if (const auto* a = std::get_if<AttentionShape>(&params.shape)) {
    variant = a->variant == AttentionVariant::FA2 ? "fa2" : "fa3";
  }
  return lookup(params.category(), params.precision, cc, variant);
}

}  // namespace gpuperf
