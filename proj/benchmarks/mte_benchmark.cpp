// Copyright 2026 The MTE Pricing Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "mte/choice.hpp"
#include "mte/equilibrium.hpp"
#include "mte/metrics.hpp"
#include "mte/pricing.hpp"
#include "mte/synthgen.hpp"

namespace mte {
namespace {

std::vector<double> RandomCosts(std::size_t n) {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> dist(0.0, 50.0);
  std::vector<double> z(n);
  for (double& v : z) v = dist(gen);
  return z;
}

void BM_Phi(benchmark::State& state) {
  const std::vector<double> z = RandomCosts(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(Phi(z, 0.7));
}
BENCHMARK(BM_Phi)->Arg(2)->Arg(4)->Arg(8)->Arg(32);

void BM_TransitionProbs(benchmark::State& state) {
  const std::vector<double> z = RandomCosts(state.range(0));
  std::vector<double> out(z.size());
  for (auto _ : state) {
    TransitionProbs(z, 0.7, out);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_TransitionProbs)->Arg(2)->Arg(4)->Arg(8)->Arg(32);

Instance Grid(int n) {
  GridGenSpec spec;
  spec.rows = n;
  spec.cols = n;
  return GenGrid(spec);
}

// One inner solve at free-flow times, for one destination.
void BM_SolveTau(benchmark::State& state) {
  const Instance instance = Grid(static_cast<int>(state.range(0)));
  const Network& net = instance.network();
  std::vector<double> times(net.num_arcs());
  for (ArcIndex a = 0; a < net.num_arcs(); ++a) times[a] = net.arc(a).free_time;
  const std::vector<double> rates(net.num_arcs(), 300.0);
  const std::vector<double> costs = GeneralizedCosts(net, times, rates, 0.7);
  const NodeIndex dest = instance.commodities().front().destination;
  SolverOptions options;
  options.inner_tol = 1e-8;
  options.inner_max_iters = 10000;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        SolveTau(net, costs, dest, 1.0, WarmStartTau(net, costs, dest), options));
  }
}
BENCHMARK(BM_SolveTau)->Arg(6)->Arg(10)->Unit(benchmark::kMicrosecond);

void BM_SolveEquilibrium(benchmark::State& state) {
  const Instance instance = Grid(static_cast<int>(state.range(0)));
  const ExpandedPrices prices = ExpandScheme({SchemeFamily::kUniform, {300.0}}, instance);
  SolverOptions options;
  options.inner_tol = 1e-6;
  options.outer_tol = 1e-2;
  options.outer_max_iters = 5000;
  options.step_rule = StepRule::kAdaptive;
  for (auto _ : state) {
    benchmark::DoNotOptimize(SolveEquilibrium(instance, prices, options));
  }
}
BENCHMARK(BM_SolveEquilibrium)->Arg(6)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_SimulateTrips(benchmark::State& state) {
  const Instance instance = Grid(6);
  const ExpandedPrices prices = ExpandScheme({SchemeFamily::kUniform, {300.0}}, instance);
  SolverOptions options;
  options.outer_tol = 1e-2;
  options.outer_max_iters = 5000;
  options.step_rule = StepRule::kAdaptive;
  const EquilibriumSolution sol = SolveEquilibrium(instance, prices, options);
  SimulationOptions sim;
  sim.runs_per_unit = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(SimulateTrips(instance, prices, sol, sim));
  }
}
BENCHMARK(BM_SimulateTrips)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace mte

BENCHMARK_MAIN();
