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

#include "gpuperf/scheduler.hpp"
#include "test_support.hpp"

using namespace gpuperf;
using testing_support::tensor_tasks;
using testing_support::unit_spec;

using Ids = std::vector<Count>;

TEST(RoundRobin, FourUniformTasksTwoSms) {
  const auto d = schedule_round_robin(tensor_tasks({1, 1, 1, 1}, 2), unit_spec(2));
  EXPECT_EQ(d.assignments[0], (Ids{0, 2}));
  EXPECT_EQ(d.assignments[1], (Ids{1, 3}));
}

TEST(RoundRobin, ThreeUniformTasksTwoSms) {
  for (int occ : {1, 2}) {
    const auto d = schedule_round_robin(tensor_tasks({1, 1, 1}, occ), unit_spec(2));
    EXPECT_EQ(d.assignments[0], (Ids{0, 2}));
    EXPECT_EQ(d.assignments[1], (Ids{1}));
  }
}

TEST(RoundRobin, SingleTaskOnLargeDevice) {
  const auto d = schedule_round_robin(tensor_tasks({5}, 1), unit_spec(108));
  ASSERT_EQ(d.assignments.size(), 108u);
  EXPECT_EQ(d.assignments[0], (Ids{0}));
  for (std::size_t i = 1; i < 108; ++i) EXPECT_TRUE(d.assignments[i].empty());
}

TEST(RoundRobin, SaturatedDispatchFollowsRetirement) {
  // First wave {0,1}; SM1 retires first, so it takes both short tasks.
  const auto d = schedule_round_robin(tensor_tasks({10, 1, 1, 1}, 1), unit_spec(2));
  EXPECT_EQ(d.assignments[0], (Ids{0}));
  EXPECT_EQ(d.assignments[1], (Ids{1, 2, 3}));
}

TEST(RoundRobin, RejectsPersistentTaskSets) {
  auto ts = tensor_tasks({1}, 1);
  ts.paradigm = ExecutionParadigm::Persistent;
  EXPECT_THROW(schedule_round_robin(ts, unit_spec(2)), Error);
}

TEST(MinHeap, BalancesGreedily) {
  const auto ts = tensor_tasks({5, 4, 3, 2}, 1, SchedulePolicy::MinHeap);
  const auto d = schedule_minheap(ts, unit_spec(2));
  EXPECT_EQ(d.assignments[0], (Ids{0, 3}));
  EXPECT_EQ(d.assignments[1], (Ids{1, 2}));
  const auto r = imbalance_report(d, ts, unit_spec(2));
  EXPECT_DOUBLE_EQ(r.max_sm_cycles, 7);
  EXPECT_DOUBLE_EQ(r.imbalance_ratio, 1.0);
}

TEST(MinHeap, LongTaskIsolated) {
  const auto ts = tensor_tasks({10, 1, 1, 1}, 1, SchedulePolicy::MinHeap);
  const auto d = schedule_minheap(ts, unit_spec(2));
  EXPECT_EQ(d.assignments[0], (Ids{0}));
  EXPECT_EQ(d.assignments[1], (Ids{1, 2, 3}));
  const auto r = imbalance_report(d, ts, unit_spec(2));
  EXPECT_DOUBLE_EQ(r.max_sm_cycles, 10);
  EXPECT_DOUBLE_EQ(r.mean_sm_cycles, 6.5);
  EXPECT_NEAR(r.imbalance_ratio, 1.538, 1e-3);
}

TEST(MinHeap, IdenticalTasksOnePerWorker) {
  const auto ts = tensor_tasks(std::vector<Count>(7, 3), 1, SchedulePolicy::MinHeap);
  const auto d = schedule_minheap(ts, unit_spec(7));
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(d.assignments[i], (Ids{Count(i)}));
}

TEST(MinHeap, OccupancyWorkersArePinnedRoundRobin) {
  const auto ts = tensor_tasks({1, 1, 1, 1}, 2, SchedulePolicy::MinHeap);
  const auto d = schedule_minheap(ts, unit_spec(2), {.persistent_workers_use_occupancy = true});
  EXPECT_EQ(d.assignments[0], (Ids{0, 2}));
  EXPECT_EQ(d.assignments[1], (Ids{1, 3}));
}

TEST(Striped, IgnoresCosts) {
  const auto ts = tensor_tasks({10, 1, 1, 1, 1}, 1, SchedulePolicy::Striped);
  const auto d = schedule(ts, unit_spec(2));
  EXPECT_EQ(d.policy, SchedulePolicy::Striped);
  EXPECT_EQ(d.assignments[0], (Ids{0, 2, 4}));
  EXPECT_EQ(d.assignments[1], (Ids{1, 3}));
}

TEST(Scheduler, EmptyTaskSetIsAnError) {
  EXPECT_THROW(schedule(TaskSet{}, unit_spec(2)), Error);
}

TEST(Scheduler, BalancedReportHasUnitRatio) {
  const auto ts = tensor_tasks({2, 2, 2, 2}, 1);
  const auto r = imbalance_report(schedule(ts, unit_spec(4)), ts, unit_spec(4));
  EXPECT_DOUBLE_EQ(r.imbalance_ratio, 1.0);
}

TEST(Scheduler, CheckPartitionDetectsViolations) {
  const auto ts = tensor_tasks({1, 1, 1}, 1);
  TaskDistribution d;
  d.num_sms = 2;
  d.assignments = {{0, 1}, {1}};
  EXPECT_THROW(check_partition(d, ts), Error);
  d.assignments = {{0}, {1}};
  EXPECT_THROW(check_partition(d, ts), Error);
  d.assignments = {{0, 2}, {1}};
  EXPECT_NO_THROW(check_partition(d, ts));
  d.assignments = {{0, 2, 1}};
  EXPECT_THROW(check_partition(d, ts), Error);
}

TEST(Scheduler, Deterministic) {
  std::vector<Count> costs;
  for (int i = 0; i < 500; ++i) costs.push_back(1 + (i * 7919) % 97);
  const auto ts = tensor_tasks(costs, 3);
  const auto a = schedule(ts, unit_spec(13));
  const auto b = schedule(ts, unit_spec(13));
  EXPECT_EQ(a.assignments, b.assignments);
}
