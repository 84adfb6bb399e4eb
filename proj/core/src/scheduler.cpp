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

#include "gpuperf/scheduler.hpp"

#include <algorithm>
#include <functional>
#include <queue>

#include "gpuperf/features.hpp"

namespace gpuperf {
namespace {

// (accumulated load, index); std::greater makes the smallest load, then the
// smallest index, the top of the queue.
using LoadSlot = std::pair<double, int>;
using MinLoadQueue = std::priority_queue<LoadSlot, std::vector<LoadSlot>, std::greater<>>;

void require_tasks(const TaskSet& ts) {
  if (ts.tasks.empty()) throw Error("cannot schedule an empty task set");
}

TaskDistribution empty_distribution(const HardwareSpec& spec, SchedulePolicy policy) {
  TaskDistribution d;
  d.num_sms = spec.num_sms;
  d.policy = policy;
  d.assignments.resize(static_cast<std::size_t>(spec.num_sms));
  return d;
}

}  // namespace

double task_cost(const Task& task, Precision precision, const HardwareSpec& spec) {
  const auto c = task_cycles(task, precision, spec);
  return std::max({c.tensor, c.fma, c.xu, c.shared});
}

TaskDistribution schedule_round_robin(const TaskSet& ts, const HardwareSpec& spec) {
  require_tasks(ts);
  if (ts.paradigm != ExecutionParadigm::ConventionalCTA) {
    throw Error("round-robin scheduling requires a conventional-CTA task set");
  }
  auto dist = empty_distribution(spec, SchedulePolicy::RoundRobin);
  const std::size_t num_sms = static_cast<std::size_t>(spec.num_sms);
  const std::size_t slots = num_sms * static_cast<std::size_t>(std::max(1, ts.occupancy_limit));
  const std::size_t first_wave = std::min(ts.tasks.size(), slots);

  std::vector<double> busy(num_sms, 0.0);
  for (std::size_t i = 0; i < first_wave; ++i) {
    const std::size_t sm = i % num_sms;
    dist.assignments[sm].push_back(ts.tasks[i].id);
    busy[sm] += task_cost(ts.tasks[i], ts.precision, spec);
  }
  if (first_wave == ts.tasks.size()) return dist;

  // Saturated: a retiring task frees its SM; approximate retirement order
  // by least accumulated busy time.
  MinLoadQueue queue;
  for (std::size_t sm = 0; sm < num_sms; ++sm) queue.emplace(busy[sm], static_cast<int>(sm));
  for (std::size_t i = first_wave; i < ts.tasks.size(); ++i) {
    auto [load, sm] = queue.top();
    queue.pop();
    dist.assignments[static_cast<std::size_t>(sm)].push_back(ts.tasks[i].id);
    queue.emplace(load + task_cost(ts.tasks[i], ts.precision, spec), sm);
  }
  return dist;
}

TaskDistribution schedule_minheap(const TaskSet& ts, const HardwareSpec& spec,
                                  const ScheduleOptions& opts) {
  require_tasks(ts);
  if (ts.paradigm != ExecutionParadigm::Persistent) {
    throw Error("min-heap scheduling requires a persistent task set");
  }
  auto dist = empty_distribution(spec, SchedulePolicy::MinHeap);
  const std::size_t per_sm =
      opts.persistent_workers_use_occupancy ? static_cast<std::size_t>(ts.occupancy_limit) : 1;
  const std::size_t workers =
      std::min(static_cast<std::size_t>(spec.num_sms) * per_sm, ts.tasks.size());

  MinLoadQueue queue;
  for (std::size_t w = 0; w < workers; ++w) queue.emplace(0.0, static_cast<int>(w));
  for (const auto& task : ts.tasks) {
    auto [load, worker] = queue.top();
    queue.pop();
    // Workers are pinned to SMs round-robin.
    dist.assignments[static_cast<std::size_t>(worker) % static_cast<std::size_t>(spec.num_sms)]
        .push_back(task.id);
    queue.emplace(load + task_cost(task, ts.precision, spec), worker);
  }
  return dist;
}

TaskDistribution schedule_striped(const TaskSet& ts, const HardwareSpec& spec) {
  require_tasks(ts);
  auto dist = empty_distribution(spec, SchedulePolicy::Striped);
  for (std::size_t i = 0; i < ts.tasks.size(); ++i) {
    dist.assignments[i % static_cast<std::size_t>(spec.num_sms)].push_back(ts.tasks[i].id);
  }
  return dist;
}

TaskDistribution schedule(const TaskSet& ts, const HardwareSpec& spec,
                          const ScheduleOptions& opts) {
  switch (ts.policy) {
    case SchedulePolicy::RoundRobin: return schedule_round_robin(ts, spec);
    case SchedulePolicy::MinHeap: return schedule_minheap(ts, spec, opts);
    case SchedulePolicy::Striped: return schedule_striped(ts, spec);
  }
  throw Error("unknown scheduling policy");
}

ImbalanceReport imbalance_report(const TaskDistribution& dist, const TaskSet& ts,
                                 const HardwareSpec& spec) {
  check_partition(dist, ts);
  ImbalanceReport r;
  double total = 0.0;
  int busy_sms = 0;
  for (const auto& ids : dist.assignments) {
    if (ids.empty()) continue;
    double load = 0.0;
    for (Count id : ids) load += task_cost(ts.tasks[static_cast<std::size_t>(id)], ts.precision, spec);
    r.max_sm_cycles = std::max(r.max_sm_cycles, load);
    total += load;
    ++busy_sms;
  }
  if (busy_sms > 0) r.mean_sm_cycles = total / busy_sms;
  r.imbalance_ratio = r.mean_sm_cycles > 0.0 ? r.max_sm_cycles / r.mean_sm_cycles : 1.0;
  return r;
}

void check_partition(const TaskDistribution& dist, const TaskSet& ts) {
  if (dist.num_sms < 1 || dist.assignments.size() != static_cast<std::size_t>(dist.num_sms)) {
    throw Error("task distribution must hold exactly one list per SM");
  }
  std::vector<char> seen(ts.tasks.size(), 0);
  std::size_t placed = 0;
  for (const auto& ids : dist.assignments) {
    for (Count id : ids) {
      if (id < 0 || static_cast<std::size_t>(id) >= ts.tasks.size()) {
        throw Error("task distribution references unknown task id " + std::to_string(id));
      }
      if (seen[static_cast<std::size_t>(id)]++) {
        throw Error("task " + std::to_string(id) + " assigned to more than one SM");
      }
      ++placed;
    }
  }
  if (placed != ts.tasks.size()) throw Error("task distribution does not cover every task");
}

}  // namespace gpuperf
