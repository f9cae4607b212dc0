/*
 * Copyright 2026 The sptc Authors
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

#include <benchmark/benchmark.h>

#include <numeric>
#include <vector>

#include "sptc/arch_model.hpp"
#include "sptc/layout_crosstalk.hpp"
#include "sptc/mask_power.hpp"
#include "sptc/ptc_core.hpp"
#include "sptc/rng.hpp"

namespace {

using namespace sptc;

std::vector<double> uniform(std::size_t n, double lo, double hi, Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

void BM_Perturb(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const DeviceParams dev;
  const CrosstalkKernel kernel(CoreShape{k, k}, LayoutParams::make(9.0, 1.0, 120.0, dev), GammaFit{});
  Rng rng(1);
  const auto phases = uniform(static_cast<std::size_t>(k) * k, -1.5, 1.5, rng);
  for (auto _ : state) benchmark::DoNotOptimize(kernel.perturb(phases));
  state.SetItemsProcessed(state.iterations() * k * k);
}
BENCHMARK(BM_Perturb)->Arg(4)->Arg(8)->Arg(16);

void BM_Mvm(benchmark::State& state) {
  const int k = static_cast<int>(state.range(0));
  const DeviceParams dev;
  auto kernel = std::make_shared<CrosstalkKernel>(CoreShape{k, k}, LayoutParams::make(9.0, 1.0, 120.0, dev),
                                                  GammaFit{});
  Rng rng(2);
  const auto w = uniform(static_cast<std::size_t>(k) * k, -1.0, 1.0, rng);
  const auto x = uniform(k, 0.0, 1.0, rng);
  std::vector<std::uint8_t> cols(k, 1);
  for (int b = 1; b < k; b += 2) cols[b] = 0;
  const PtcCore core(CoreShape{k, k}, w, {}, cols, kernel, dev,
                     MvmOptions{ExecutionMode::InputGatingRedistribution, false, true});
  for (auto _ : state) benchmark::DoNotOptimize(core.mvm(x, rng));
  state.SetItemsProcessed(state.iterations() * k * k);
}
BENCHMARK(BM_Mvm)->Arg(4)->Arg(8)->Arg(16);

void BM_ChunkPower(benchmark::State& state) {
  ArchConfig arch;
  const DeviceParams dev;
  const auto layout = LayoutParams::make(9.0, 1.0, 120.0, dev);
  Rng rng(3);
  ChunkState chunk;
  chunk.weights = uniform(static_cast<std::size_t>(arch.chunk_rows()) * arch.chunk_cols(), -1.0, 1.0, rng);
  chunk.col_mask.assign(arch.chunk_cols(), 1);
  for (int b = 0; b < arch.chunk_cols(); b += 3) chunk.col_mask[b] = 0;
  const GatingPolicy policy{ExecutionMode::InputGatingRedistribution, true};
  for (auto _ : state) benchmark::DoNotOptimize(chunk_power(arch, dev, layout, GammaFit{}, chunk, policy));
}
BENCHMARK(BM_ChunkPower);

void BM_Selection(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(4);
  const auto cost_of = uniform(n, 0.0, 1.0, rng);
  std::vector<int> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  const auto cost = [&](std::span<const int> ids) {
    double s = 0.0;
    for (int id : ids) s += cost_of[id];
    return s;
  };
  for (auto _ : state) benchmark::DoNotOptimize(select_min_power(pool, n / 2, 10000, cost));
}
BENCHMARK(BM_Selection)->Arg(6)->Arg(10)->Arg(16);

}  // namespace

BENCHMARK_MAIN();
