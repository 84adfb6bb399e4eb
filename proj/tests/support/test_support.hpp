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

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "gpuperf/decomposer.hpp"
#include "gpuperf/estimator.hpp"
#include "gpuperf/hwspec.hpp"

namespace testing_support {

inline std::filesystem::path data_dir() { return GPUPERF_TEST_DATA_DIR; }

inline gpuperf::HardwareSpec shipped_spec(const std::string& stem) {
  return gpuperf::load_spec(data_dir() / "hw" / (stem + ".json"));
}

/// A small device with unit throughputs so that task cost == tensor ops.
inline gpuperf::HardwareSpec unit_spec(int num_sms, double tensor_th = 1.0) {
  gpuperf::HardwareSpec s;
  s.name = "unit";
  s.compute_capability = 8.0;
  s.num_sms = num_sms;
  s.sm_clock_mhz = 1000.0;
  s.tensor_throughput = {{gpuperf::Precision::BF16, tensor_th}};
  s.fma_throughput = 1.0;
  s.xu_throughput = 1.0;
  s.global_mem_bw_gbps = 1000.0;
  s.l2_bw_gbps = 2000.0;
  s.smem_bw_bytes_per_cycle_per_sm = 128.0;
  s.smem_size_per_sm_kib = 100.0;
  s.regfile_size_per_sm_kib = 256.0;
  s.max_warps_per_sm = 64;
  s.max_ctas_per_sm = 32;
  return s;
}

/// Task set whose tasks carry only Tensor ops (no memory traffic).
inline gpuperf::TaskSet tensor_tasks(const std::vector<gpuperf::Count>& ops, int occupancy,
                                     gpuperf::SchedulePolicy policy =
                                         gpuperf::SchedulePolicy::RoundRobin) {
  gpuperf::TaskSet ts;
  ts.occupancy_limit = occupancy;
  ts.policy = policy;
  if (policy != gpuperf::SchedulePolicy::RoundRobin) ts.paradigm = gpuperf::ExecutionParadigm::Persistent;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    gpuperf::Task t;
    t.id = static_cast<gpuperf::Count>(i);
    t.ops[0] = ops[i];
    ts.tasks.push_back(t);
  }
  return ts;
}

/// Estimator for `category` whose network outputs sigmoid(logit) for
/// every input.
inline gpuperf::Estimator constant_estimator(gpuperf::KernelCategory category, double logit,
                                             gpuperf::nn::LossSpec loss = gpuperf::nn::LossSpec::mape()) {
  gpuperf::Estimator e;
  e.category = category;
  e.layout = gpuperf::feature_layout(category);
  e.model = gpuperf::nn::Mlp(e.layout.size(), {4}, 0.0, 1);
  e.model.dense().back().weight.fill(0.0);
  e.model.dense().back().bias[0] = logit;
  e.norm.mean.assign(e.layout.size(), 0.0);
  e.norm.std.assign(e.layout.size(), 1.0);
  e.loss = loss;
  return e;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string pattern = (std::filesystem::temp_directory_path() / "gpuperf-test-XXXXXX").string();
    path_ = ::mkdtemp(pattern.data());
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support
