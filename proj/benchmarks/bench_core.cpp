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

// Throughput of the analytical pipeline and the estimator forward pass.

#include <benchmark/benchmark.h>

#include <filesystem>

#include "gpuperf/decomposer.hpp"
#include "gpuperf/e2e.hpp"
#include "gpuperf/estimator.hpp"
#include "gpuperf/features.hpp"
#include "gpuperf/scheduler.hpp"

namespace {

using namespace gpuperf;

const std::filesystem::path kData = GPUPERF_BENCH_DATA_DIR;

const HardwareSpec& h100() {
  static const HardwareSpec spec = load_spec(kData / "hw" / "h100.json");
  return spec;
}

const TilingTable& tiling() {
  static const TilingTable table = TilingTable::builtin();
  return table;
}

KernelParams square_gemm(Count n) { return {GemmShape{n, n, n}, Precision::BF16}; }

KernelParams causal_prefill(Count seq) {
  AttentionShape a;
  a.num_heads = 32;
  a.num_kv_heads = 8;
  a.head_dim = 128;
  a.qlens = {seq, seq, seq, seq};
  a.kvlens = a.qlens;
  return {a, Precision::BF16};
}

// Untrained estimator of production size; only its cost matters here.
Estimator random_estimator(KernelCategory c) {
  Estimator e;
  e.category = c;
  e.layout = feature_layout(c);
  e.model = nn::Mlp(e.layout.size(), {256, 128, 64}, 0.1, 1);
  e.norm.mean.assign(e.layout.size(), 0.0);
  e.norm.std.assign(e.layout.size(), 1.0);
  return e;
}

void BM_DecomposeGemm(benchmark::State& state) {
  const auto p = square_gemm(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(decompose(p, h100(), tiling()));
}
BENCHMARK(BM_DecomposeGemm)->Arg(1024)->Arg(8192)->Arg(32768);

void BM_DecomposeCausalAttention(benchmark::State& state) {
  const auto p = causal_prefill(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(decompose(p, h100(), tiling()));
}
BENCHMARK(BM_DecomposeCausalAttention)->Arg(512)->Arg(8192);

void BM_Schedule(benchmark::State& state) {
  TaskSet ts = decompose(square_gemm(8192), h100(), tiling());
  ts.policy = static_cast<SchedulePolicy>(state.range(0));
  ts.paradigm = ts.policy == SchedulePolicy::RoundRobin ? ExecutionParadigm::ConventionalCTA
                                                        : ExecutionParadigm::Persistent;
  for (auto _ : state) benchmark::DoNotOptimize(schedule(ts, h100()));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(ts.tasks.size()));
}
BENCHMARK(BM_Schedule)->Arg(0)->Arg(1)->Arg(2);

void BM_Analyze(benchmark::State& state) {
  const TaskSet ts = decompose(causal_prefill(8192), h100(), tiling());
  const TaskDistribution dist = schedule(ts, h100());
  for (auto _ : state) benchmark::DoNotOptimize(analyze(ts, dist, h100()));
}
BENCHMARK(BM_Analyze);

void BM_BuildFeatures(benchmark::State& state) {
  const auto p = square_gemm(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(build_features(p, h100(), tiling()));
}
BENCHMARK(BM_BuildFeatures)->Arg(1024)->Arg(8192);

void BM_MlpPredict(benchmark::State& state) {
  const Estimator e = random_estimator(KernelCategory::Gemm);
  const FeatureVector fv = build_features(square_gemm(4096), h100(), tiling());
  const std::vector<FeatureVector> batch(static_cast<std::size_t>(state.range(0)), fv);
  for (auto _ : state) benchmark::DoNotOptimize(e.predict_efficiency(batch));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MlpPredict)->Arg(1)->Arg(256);

void BM_PredictE2E(benchmark::State& state) {
  const ModelConfig model = ModelConfig::load(kData / "models" / "dense-32l.json");
  ParallelConfig par;
  par.tp = 2;
  const std::vector<Request> batch(8, Request{512, state.range(0)});
  const KernelTrace trace = generate_trace(model, par, batch);
  EstimatorSet set;
  for (KernelCategory c : {KernelCategory::Gemm, KernelCategory::Attention, KernelCategory::RmsNorm,
                           KernelCategory::SiluMul}) {
    set[c] = random_estimator(c);
  }
  const CommModel comm = CommModel::load(kData / "comm" / "nvlink.json");
  for (auto _ : state) {
    benchmark::DoNotOptimize(predict_e2e(trace, {&set, &h100(), &tiling(), &comm, "nvlink"}));
  }
  state.counters["invocations"] = static_cast<double>(trace.size());
}
BENCHMARK(BM_PredictE2E)->Arg(10)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
