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

#ifndef MTE_SOLVER_OPTIONS_HPP_
#define MTE_SOLVER_OPTIONS_HPP_

#include <functional>
#include <string>

namespace mte {

// Outer-loop step size.
//   kBaillon:  max(0.125, 1 / (k + 1))
//   kMsa:      1 / (k + 1)
//   kAdaptive: kBaillon scaled by a factor that halves whenever the
//              outer residual grows, never below 1/1024.
enum class StepRule { kBaillon, kMsa, kAdaptive };

const char* StepRuleName(StepRule rule);
StepRule ParseStepRule(const std::string& name);

struct IterationRecord {
  int iteration = 0;
  double residual = 0.0;
  double step = 0.0;
  int max_inner_iterations = 0;
  double wall_seconds = 0.0;
};

struct SolverOptions {
  double inner_tol = 1e-1;
  int inner_max_iters = 1000;
  double outer_tol = 10.0;
  int outer_max_iters = 10;
  StepRule step_rule = StepRule::kBaillon;
  // |tau| above this aborts the inner solve as infeasible.
  double divergence_guard = 1e9;
  // Consecutive strictly-decreasing inner sweeps with a stalled residual
  // that count as unbounded descent.
  int divergence_window = 50;
  // Worker threads for the per-(stratum, destination) loop.
  int workers = 1;
  // Called after every outer iteration when set.
  std::function<void(const IterationRecord&)> on_iteration;
};

// Step size for outer iteration k (0-based) under the fixed rules.
double StepSize(StepRule rule, int k);

}  // namespace mte

#endif  // MTE_SOLVER_OPTIONS_HPP_
