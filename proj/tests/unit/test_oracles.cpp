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

#include <algorithm>

#include "gpuperf/scheduler.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace gpuperf;

TEST(BruteOps, GemmLiteralCount) {
  EXPECT_EQ(oracle::brute_ops({GemmShape{8, 8, 8}, Precision::BF16}).tensor, 1024);
}

TEST(BruteOps, CausalAttentionRowSum) {
  AttentionShape a;
  a.head_dim = 2;
  a.qlens = {4};
  a.kvlens = {4};
  const auto c = oracle::brute_ops({a, Precision::BF16});
  EXPECT_EQ(c.tensor, 80);
  EXPECT_EQ(c.xu, 10);
}

TEST(BruteOps, RmsNorm) {
  const auto c = oracle::brute_ops({RmsNormShape{2, 4}, Precision::BF16});
  EXPECT_EQ(c.fma, 24);
  EXPECT_EQ(c.xu, 2);
}

TEST(BruteOps, TooLargeInstance) {
  EXPECT_THROW(oracle::brute_ops({GemmShape{8192, 8192, 1}, Precision::BF16}), std::length_error);
}

TEST(BruteOps, ScoreElements) {
  EXPECT_EQ(oracle::attention_score_elements(2, 5, true), 4 + 5);
  EXPECT_EQ(oracle::attention_score_elements(2, 5, false), 10);
}

TEST(EventSchedule, LongTaskFirst) {
  const std::vector<double> costs = {10, 1, 1, 1};
  const auto r = oracle::event_schedule(costs, 2, 1);
  EXPECT_EQ(*std::max_element(r.loads.begin(), r.loads.end()), 10.0);

  const auto spec = testing_support::unit_spec(2);
  const auto ts = testing_support::tensor_tasks({10, 1, 1, 1}, 1);
  const auto rep = imbalance_report(schedule_round_robin(ts, spec), ts, spec);
  EXPECT_EQ(rep.max_sm_cycles, 10.0);
}

TEST(EventSchedule, UniformCostsMatchGreedy) {
  const auto spec = testing_support::unit_spec(5);
  for (int occ : {1, 2, 3}) {
    const std::vector<Count> ops(37, 4);
    const std::vector<double> costs(37, 4.0);
    const auto ev = oracle::event_schedule(costs, 5, occ);
    const auto d = schedule_round_robin(testing_support::tensor_tasks(ops, occ), spec);
    for (std::size_t sm = 0; sm < 5; ++sm) {
      EXPECT_EQ(d.assignments[sm].size(), ev.assignments[sm].size()) << "occ " << occ;
    }
  }
}

TEST(NumericGradient, Quadratic) {
  std::vector<double> p = {1.0, -2.0};
  const auto g = oracle::numeric_gradient([&] { return p[0] * p[0] + 3 * p[1]; }, p, 1e-5);
  EXPECT_NEAR(g[0], 2.0, 1e-8);
  EXPECT_NEAR(g[1], 3.0, 1e-8);
  EXPECT_EQ(p[0], 1.0);
}
