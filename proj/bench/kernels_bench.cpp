/**
 * Copyright 2026 The Sparse Forge Authors
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

// Serial reference vs OpenMP kernel timings. Set OMP_NUM_THREADS to compare
// thread counts; on a single core the two should be close.
#include <benchmark/benchmark.h>

#include <random>

#include "sforge/fp8.hpp"
#include "sforge/moe_router.hpp"
#include "sforge/wsm.hpp"

namespace {

sforge::fp8::Matrix gaussian(std::size_t rows, std::size_t cols) {
  std::mt19937_64 gen(17);
  std::normal_distribution<double> n(0.0, 1.0);
  sforge::fp8::Matrix m(rows, cols);
  for (auto &x : m.data) x = n(gen);
  return m;
}

void BM_QuantizeSerial(benchmark::State &st) {
  const auto m = gaussian(st.range(0), st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(sforge::fp8::quantize_serial(m, sforge::fp8::Layout::weight));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(m.data.size()));
}
void BM_QuantizeParallel(benchmark::State &st) {
  const auto m = gaussian(st.range(0), st.range(0));
  for (auto _ : st) benchmark::DoNotOptimize(sforge::fp8::quantize(m, sforge::fp8::Layout::weight));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(m.data.size()));
}
BENCHMARK(BM_QuantizeSerial)->Arg(512)->Arg(2048);
BENCHMARK(BM_QuantizeParallel)->Arg(512)->Arg(2048);

sforge::wsm::CheckpointSeries series(std::size_t k, std::size_t dim) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> n(0.0, 1.0);
  sforge::wsm::CheckpointSeries s;
  for (std::size_t j = 0; j <= k; ++j) {
    sforge::wsm::Vector v(dim);
    for (auto &x : v) x = n(gen);
    s.vectors.push_back(std::move(v));
  }
  return s;
}

void BM_MergeSerial(benchmark::State &st) {
  const auto s = series(8, st.range(0));
  const sforge::wsm::MergeWeights c{std::vector<double>(9, 1.0 / 9.0)};
  for (auto _ : st) benchmark::DoNotOptimize(sforge::wsm::merge_checkpoints_serial(s, c));
}
void BM_MergeParallel(benchmark::State &st) {
  const auto s = series(8, st.range(0));
  const sforge::wsm::MergeWeights c{std::vector<double>(9, 1.0 / 9.0)};
  for (auto _ : st) benchmark::DoNotOptimize(sforge::wsm::merge_checkpoints(s, c));
}
BENCHMARK(BM_MergeSerial)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_MergeParallel)->Arg(1 << 16)->Arg(1 << 20);

std::vector<double> scores(std::size_t tokens, std::size_t experts) {
  std::mt19937_64 gen(9);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> s(tokens * experts);
  for (auto &x : s) x = n(gen);
  return s;
}

void BM_RouteSerial(benchmark::State &st) {
  const sforge::router::RouterConfig cfg;
  const auto s = scores(st.range(0), cfg.n_experts);
  const auto bias = sforge::router::BiasState::zeros(cfg.n_experts);
  for (auto _ : st) benchmark::DoNotOptimize(sforge::router::route_batch_serial(s, bias, cfg));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
void BM_RouteParallel(benchmark::State &st) {
  const sforge::router::RouterConfig cfg;
  const auto s = scores(st.range(0), cfg.n_experts);
  const auto bias = sforge::router::BiasState::zeros(cfg.n_experts);
  for (auto _ : st) benchmark::DoNotOptimize(sforge::router::route_batch(s, bias, cfg));
  st.SetItemsProcessed(st.iterations() * st.range(0));
}
BENCHMARK(BM_RouteSerial)->Arg(1024)->Arg(8192);
BENCHMARK(BM_RouteParallel)->Arg(1024)->Arg(8192);

}  // namespace

BENCHMARK_MAIN();
