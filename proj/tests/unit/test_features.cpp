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

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "gpuperf/estimator.hpp"
#include "gpuperf/features.hpp"
#include "test_support.hpp"

using namespace gpuperf;
using testing_support::shipped_spec;
using testing_support::tensor_tasks;
using testing_support::unit_spec;

TEST(TaskCycles, TensorDivision) {
  Task t;
  t.ops[0] = 134217728;
  const auto c = task_cycles(t, Precision::BF16, shipped_spec("a100"));
  EXPECT_DOUBLE_EQ(c.tensor, 65536);
  EXPECT_EQ(c.fma, 0.0);
}

TEST(TaskCycles, XuDivision) {
  Task t;
  t.ops[static_cast<std::size_t>(Pipeline::XU)] = 1;
  EXPECT_DOUBLE_EQ(task_cycles(t, Precision::BF16, shipped_spec("a100")).xu, 0.0625);
}

TEST(TaskCycles, ZeroTask) {
  const auto c = task_cycles(Task{}, Precision::BF16, shipped_spec("a100"));
  EXPECT_EQ(c.tensor, 0.0);
  EXPECT_EQ(c.fma, 0.0);
  EXPECT_EQ(c.xu, 0.0);
  EXPECT_EQ(c.shared, 0.0);
}

TEST(Analyze, BalancedCase) {
  const auto spec = unit_spec(2, 16);
  const auto ts = tensor_tasks({1024, 1024, 1024, 1024}, 2);
  TaskDistribution d{{{0, 1}, {2, 3}}, 2, SchedulePolicy::RoundRobin};
  const auto fv = analyze(ts, d, spec);
  EXPECT_EQ(fv.total_ops_on(Pipeline::Tensor), 4096);
  EXPECT_DOUBLE_EQ(fv.total_cycles_on(Pipeline::Tensor), 128);
  EXPECT_EQ(fv.max_sm_ops_on(Pipeline::Tensor), 2048);
  EXPECT_DOUBLE_EQ(fv.max_sm_cycles_on(Pipeline::Tensor), 128);
}

TEST(Analyze, ImbalancedCase) {
  const auto spec = unit_spec(2, 16);
  const auto ts = tensor_tasks({1024, 1024, 1024, 1024}, 2);
  TaskDistribution d{{{0, 1, 2}, {3}}, 2, SchedulePolicy::RoundRobin};
  const auto fv = analyze(ts, d, spec);
  EXPECT_DOUBLE_EQ(fv.max_sm_cycles_on(Pipeline::Tensor), 192);
  EXPECT_DOUBLE_EQ(fv.total_cycles_on(Pipeline::Tensor), 128);
}

TEST(Analyze, RejectsNonPartition) {
  const auto ts = tensor_tasks({1, 1}, 1);
  TaskDistribution d{{{0}, {0}}, 2, SchedulePolicy::RoundRobin};
  EXPECT_THROW(analyze(ts, d, unit_spec(2)), Error);
}

TEST(Layout, FeatureCounts) {
  EXPECT_EQ(feature_layout(KernelCategory::Gemm).size(), 11u);
  EXPECT_EQ(feature_layout(KernelCategory::ScaledMM).size(), 11u);
  EXPECT_EQ(feature_layout(KernelCategory::FusedMoE).size(), 11u);
  EXPECT_EQ(feature_layout(KernelCategory::Attention).size(), 15u);
  EXPECT_EQ(feature_layout(KernelCategory::RmsNorm).size(), 15u);
  EXPECT_EQ(feature_layout(KernelCategory::SiluMul).size(), 15u);
  EXPECT_EQ(feature_layout(KernelCategory::Gemm).front(), "tensor.total_ops");
}

TEST(Layout, UnusedPipelineIsOmitted) {
  const auto names = feature_layout(KernelCategory::Attention);
  for (const auto& n : names) EXPECT_EQ(n.find("fma."), std::string::npos) << n;
}

TEST(BuildFeatures, GemmOnA100) {
  const auto hw = shipped_spec("a100");
  const auto fv = build_features({GemmShape{4096, 4096, 4096}, Precision::BF16}, hw,
                                 TilingTable::builtin());
  EXPECT_EQ(fv.values().size(), 11u);
  EXPECT_DOUBLE_EQ(fv.total_cycles_on(Pipeline::Tensor), 1024.0 * 134217728 / (108.0 * 2048));
  EXPECT_DOUBLE_EQ(fv.total_cycles_on(Pipeline::Tensor), 1024.0 * 65536 / 108.0);
  // 1024 tasks over 108 SMs at occupancy 2: the busiest SM runs 10 tiles.
  EXPECT_DOUBLE_EQ(fv.max_sm_cycles_on(Pipeline::Tensor), 10 * 65536.0);
}

TEST(BuildFeatures, CausalAttentionOnA100) {
  AttentionShape a;
  a.num_heads = 1;
  a.num_kv_heads = 1;
  a.head_dim = 128;
  a.qlens = {256};
  a.kvlens = {256};
  const KernelParams p{a, Precision::BF16};
  const auto hw = shipped_spec("a100");
  const auto fv = build_features(p, hw, TilingTable::builtin());
  EXPECT_EQ(fv.values().size(), 15u);
  EXPECT_DOUBLE_EQ(fv.max_sm_cycles_on(Pipeline::Tensor), 16777216.0 / 2048);
  EXPECT_EQ(build_features(p, hw, TilingTable::builtin()).values(), fv.values());
}

TEST(BuildFeatures, TheoreticalTimeIsTheLargestRoof) {
  const auto hw = shipped_spec("h100");
  const auto fv = build_features({GemmShape{512, 8192, 1024}, Precision::BF16}, hw,
                                 TilingTable::builtin());
  const double roof = std::max({fv.total_cycles_on(Pipeline::Tensor), fv.cycles_global_gpu,
                                fv.cycles_l2_gpu});
  EXPECT_DOUBLE_EQ(fv.theoretical_time_us, cycles_to_us(roof, hw));
}

TEST(BuildFeatures, JsonFollowsLayout) {
  const auto fv = build_features({RmsNormShape{64, 4096}, Precision::BF16}, shipped_spec("a100"),
                                 TilingTable::builtin());
  const auto j = to_json(fv);
  const auto names = feature_layout(KernelCategory::RmsNorm);
  ASSERT_EQ(j["features"].size(), names.size());
  for (std::size_t i = 0; i < names.size(); ++i) EXPECT_EQ(j["features"][i]["name"], names[i]);
}
