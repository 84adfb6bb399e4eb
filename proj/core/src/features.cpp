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

#include "gpuperf/features.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

namespace gpuperf {
namespace {

constexpr std::array<const char*, 7> kMemoryFeatures = {
    "mio.total_bytes",          "mio.cycles_global_gpu",   "mio.cycles_l2_gpu",
    "mio.max_sm_bytes",         "mio.cycles_global_max_sm", "mio.cycles_l2_max_sm",
    "mio.cycles_shared_max_sm"};

std::size_t idx(Pipeline p) { return static_cast<std::size_t>(p); }

double pipeline_throughput(Pipeline p, Precision precision, const HardwareSpec& spec) {
  auto th = spec.throughput(p, precision);
  if (!th) {
    throw Error(spec.name + ": no " + std::string(to_string(p)) + " throughput for " +
                std::string(to_string(precision)));
  }
  return *th;
}

}  // namespace

double TaskCycles::on(Pipeline p) const {
  switch (p) {
    case Pipeline::Tensor: return tensor;
    case Pipeline::FMA: return fma;
    case Pipeline::XU: return xu;
  }
  return 0.0;
}

TaskCycles task_cycles(const Task& task, Precision precision, const HardwareSpec& spec) {
  TaskCycles c;
  auto cycles = [&](Pipeline p) {
    const Count ops = task.ops_on(p);
    return ops == 0 ? 0.0 : static_cast<double>(ops) / pipeline_throughput(p, precision, spec);
  };
  c.tensor = cycles(Pipeline::Tensor);
  c.fma = cycles(Pipeline::FMA);
  c.xu = cycles(Pipeline::XU);
  c.shared = static_cast<double>(task.load_bytes) / spec.smem_bw_bytes_per_cycle_per_sm;
  return c;
}

std::vector<Pipeline> pipelines_for(KernelCategory category) {
  switch (category) {
    case KernelCategory::Gemm:
    case KernelCategory::ScaledMM:
    case KernelCategory::FusedMoE: return {Pipeline::Tensor};
    case KernelCategory::Attention: return {Pipeline::Tensor, Pipeline::XU};
    case KernelCategory::RmsNorm:
    case KernelCategory::SiluMul: return {Pipeline::FMA, Pipeline::XU};
  }
  throw Error("unsupported kernel category");
}

std::vector<std::string> feature_layout(KernelCategory category) {
  std::vector<std::string> names;
  for (Pipeline p : pipelines_for(category)) {
    const std::string prefix(to_string(p));
    names.push_back(prefix + ".total_ops");
    names.push_back(prefix + ".total_cycles");
    names.push_back(prefix + ".max_sm_ops");
    names.push_back(prefix + ".max_sm_cycles");
  }
  names.insert(names.end(), kMemoryFeatures.begin(), kMemoryFeatures.end());
  return names;
}

std::vector<double> FeatureVector::values() const {
  std::vector<double> v;
  v.reserve(pipelines.size() * 4 + kMemoryFeatures.size());
  for (Pipeline p : pipelines) {
    v.push_back(static_cast<double>(total_ops_on(p)));
    v.push_back(total_cycles_on(p));
    v.push_back(static_cast<double>(max_sm_ops_on(p)));
    v.push_back(max_sm_cycles_on(p));
  }
  v.push_back(static_cast<double>(total_bytes));
  v.push_back(cycles_global_gpu);
  v.push_back(cycles_l2_gpu);
  v.push_back(static_cast<double>(max_sm_bytes));
  v.push_back(cycles_global_max_sm);
  v.push_back(cycles_l2_max_sm);
  v.push_back(cycles_shared_max_sm);
  return v;
}

FeatureVector analyze(const TaskSet& ts, const TaskDistribution& dist, const HardwareSpec& spec) {
  check_partition(dist, ts);
  if (dist.num_sms != spec.num_sms) throw Error("distribution SM count does not match the device");

  FeatureVector fv;
  fv.category = ts.category;
  fv.pipelines = pipelines_for(ts.category);

  // SM level: per-pipeline op sums and load bytes.
  for (const auto& ids : dist.assignments) {
    std::array<Count, kNumPipelines> sm_ops{};
    Count sm_bytes = 0;
    for (Count id : ids) {
      const Task& t = ts.tasks[static_cast<std::size_t>(id)];
      for (std::size_t p = 0; p < kNumPipelines; ++p) sm_ops[p] += t.ops[p];
      sm_bytes += t.load_bytes;
    }
    for (std::size_t p = 0; p < kNumPipelines; ++p) {
      fv.total_ops[p] += sm_ops[p];
      fv.max_sm_ops[p] = std::max(fv.max_sm_ops[p], sm_ops[p]);
    }
    fv.total_bytes += sm_bytes;
    fv.max_sm_bytes = std::max(fv.max_sm_bytes, sm_bytes);
  }

  // GPU level.
  const double num_sms = spec.num_sms;
  for (Pipeline p : kAllPipelines) {
    if (fv.total_ops[idx(p)] == 0) continue;
    const double th = pipeline_throughput(p, ts.precision, spec);
    fv.total_cycles[idx(p)] = static_cast<double>(fv.total_ops[idx(p)]) / (num_sms * th);
    fv.max_sm_cycles[idx(p)] = static_cast<double>(fv.max_sm_ops[idx(p)]) / th;
  }

  const double bytes = static_cast<double>(fv.total_bytes);
  const double sm_bytes = static_cast<double>(fv.max_sm_bytes);
  fv.cycles_global_gpu = bytes_to_cycles(bytes, spec.global_mem_bw_gbps, spec);
  fv.cycles_l2_gpu = bytes_to_cycles(bytes, spec.l2_bw_gbps, spec);
  // Per-SM share of the device-wide bandwidths.
  fv.cycles_global_max_sm = bytes_to_cycles(sm_bytes, spec.global_mem_bw_gbps / num_sms, spec);
  fv.cycles_l2_max_sm = bytes_to_cycles(sm_bytes, spec.l2_bw_gbps / num_sms, spec);
  fv.cycles_shared_max_sm = sm_bytes / spec.smem_bw_bytes_per_cycle_per_sm;

  double roof = std::max(fv.cycles_global_gpu, fv.cycles_l2_gpu);
  for (Pipeline p : fv.pipelines) roof = std::max(roof, fv.total_cycles_on(p));
  fv.theoretical_time_us = cycles_to_us(roof, spec);
  return fv;
}

nlohmann::json to_json(const FeatureVector& fv) {
  nlohmann::json features = nlohmann::json::object();
  const auto names = feature_layout(fv.category);
  const auto values = fv.values();
  nlohmann::json ordered = nlohmann::json::array();
  for (std::size_t i = 0; i < names.size(); ++i) {
    ordered.push_back({{"name", names[i]}, {"value", values[i]}});
  }
  return {{"kernel", to_string(fv.category)},
          {"features", ordered},
          {"theoretical_time_us", fv.theoretical_time_us}};
}

}  // namespace gpuperf
