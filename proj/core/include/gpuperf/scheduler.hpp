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

#include <vector>

#include "gpuperf/decomposer.hpp"
#include "gpuperf/hwspec.hpp"

namespace gpuperf {

/// Partition of a task set across SMs: assignments[j] lists the ids of the
/// tasks placed on SM j, in assignment order.
struct TaskDistribution {
  std::vector<std::vector<Count>> assignments;
  int num_sms = 0;
  SchedulePolicy policy = SchedulePolicy::RoundRobin;
};

struct ScheduleOptions {
  /// Persistent kernels launch one worker per SM unless this is set, in
  /// which case workers = N_SM * occupancy_limit.
  bool persistent_workers_use_occupancy = false;
};

/// Hardware round-robin dispatch: cyclic rounds while every SM has a free
/// slot, then each further task goes to the SM with the least accumulated
/// busy time (ties to the lowest index).
TaskDistribution schedule_round_robin(const TaskSet& ts, const HardwareSpec& spec);

/// Persistent workers pull tasks in order; each task goes to the worker
/// with the least accumulated cost (ties to the lowest worker index).
TaskDistribution schedule_minheap(const TaskSet& ts, const HardwareSpec& spec,
                                  const ScheduleOptions& opts = {});

/// Cost-agnostic striping: task i -> SM i mod N_SM.
TaskDistribution schedule_striped(const TaskSet& ts, const HardwareSpec& spec);

/// Dispatches on ts.policy.
TaskDistribution schedule(const TaskSet& ts, const HardwareSpec& spec,
                          const ScheduleOptions& opts = {});

/// Busy-time proxy of one task: max over pipelines (and shared-memory
/// traffic) of its theoretical cycles.
double task_cost(const Task& task, Precision precision, const HardwareSpec& spec);

struct ImbalanceReport {
  double max_sm_cycles = 0.0;
  double mean_sm_cycles = 0.0;  // over non-empty SMs
  double imbalance_ratio = 1.0;
};

ImbalanceReport imbalance_report(const TaskDistribution& dist, const TaskSet& ts,
                                 const HardwareSpec& spec);

/// Throws Error unless `dist` is a partition of the ids of `ts` with
/// exactly num_sms lists.
void check_partition(const TaskDistribution& dist, const TaskSet& ts);

}  // namespace gpuperf
