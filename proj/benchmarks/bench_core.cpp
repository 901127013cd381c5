// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "noma/channel.hpp"
#include "noma/conic.hpp"
#include "noma/metrics.hpp"
#include "noma/sca.hpp"

namespace {

namespace sca = noma::sca;

noma::ChannelSet default_channels(std::uint64_t seed) {
  noma::ChannelConfig cfg;
  cfg.seed = seed;
  return noma::generate_channels(cfg);
}

void BM_GenerateChannels(benchmark::State& state) {
  noma::ChannelConfig cfg;
  for (auto _ : state) {
    ++cfg.seed;
    benchmark::DoNotOptimize(noma::generate_channels(cfg));
  }
}
BENCHMARK(BM_GenerateChannels);

void BM_Evaluate(benchmark::State& state) {
  const auto h = default_channels(3);
  const auto w = sca::initial_beamformers(h, 1000.0);
  for (auto _ : state) benchmark::DoNotOptimize(noma::evaluate(w, h));
}
BENCHMARK(BM_Evaluate);

// One convexified subproblem at the starting point (70 variables at K = 5).
void BM_SubproblemSolve(benchmark::State& state) {
  const auto h = default_channels(3);
  const sca::TradeoffWeights weights{0.5, 10.0};
  const auto start = sca::initialize_feasible(h, 1000.0, weights);
  const auto sp = sca::build_subproblem(start, weights, h, 1000.0);
  for (auto _ : state) benchmark::DoNotOptimize(noma::conic::solve(sp.problem));
}
BENCHMARK(BM_SubproblemSolve)->Unit(benchmark::kMillisecond);

void BM_ScaSolve(benchmark::State& state) {
  const double alpha = static_cast<double>(state.range(0)) / 4.0;
  const double budget = std::pow(10.0, static_cast<double>(state.range(1)) / 10.0);
  const auto h = default_channels(3);
  const double f1 = sca::utopia_sum_rate(h, budget);
  int iterations = 0;
  for (auto _ : state) {
    const auto run = sca::sca_solve(h, {alpha, f1}, budget);
    iterations = run.iterations;
    benchmark::DoNotOptimize(run.metrics.sum_rate);
  }
  state.counters["sca_iterations"] = iterations;
}
BENCHMARK(BM_ScaSolve)
    ->ArgsProduct({{0, 2, 4}, {15, 30}})
    ->ArgNames({"alpha_x4", "snr_db"})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
