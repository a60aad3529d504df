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

#ifndef MTE_EQUILIBRIUM_HPP_
#define MTE_EQUILIBRIUM_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "mte/instance.hpp"
#include "mte/network.hpp"
#include "mte/pricing.hpp"
#include "mte/solver_options.hpp"

namespace mte {

// Per-arc generalized cost of one stratum: time + weight * kappa(rate).
std::vector<double> GeneralizedCosts(const Network& network,
                                     std::span<const double> arc_time,
                                     std::span<const double> rates, double price_weight);

// Shortest generalized cost to `destination`, the starting point of the
// fixed-point iteration.
std::vector<double> WarmStartTau(const Network& network, std::span<const double> costs,
                                 NodeIndex destination);

struct TauResult {
  std::vector<double> tau;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

// Synchronous fixed-point sweeps tau <- phi(c + tau) with tau_d = 0.
// Throws InfeasibleInstanceError when tau leaves the divergence guard or
// decreases without bound.
TauResult SolveTau(const Network& network, std::span<const double> costs,
                   NodeIndex destination, double beta_t, std::vector<double> tau_init,
                   const SolverOptions& options);

// max over i != d of |tau_i - phi_i(c + tau)|.
double TauResidual(const Network& network, std::span<const double> costs,
                   NodeIndex destination, double beta_t, std::span<const double> tau);

// Newton steps (I - P) delta = phi(c + tau) - tau until the residual stops
// improving. Returns the final residual.
double PolishTau(const Network& network, std::span<const double> costs,
                 NodeIndex destination, double beta_t, std::vector<double>& tau,
                 int max_steps = 20);

// Logit probability of every arc at its tail; arcs leaving the
// destination get 0.
std::vector<double> ArcProbabilities(const Network& network, std::span<const double> costs,
                                     NodeIndex destination, double beta_t,
                                     std::span<const double> tau);

// Cost-to-go of the outgoing arcs of node i.
std::vector<double> NodeCostToGo(const Network& network, std::span<const double> costs,
                                 std::span<const double> tau, NodeIndex node);

// Solution of one (stratum, destination) subproblem. Vectors are indexed
// by node or arc of the network.
struct CommoditySolution {
  std::size_t stratum = 0;
  NodeIndex destination = 0;
  std::vector<double> tau;
  std::vector<double> arc_prob;
  std::vector<double> demand;        // g_i
  std::vector<double> outside_prob;  // at nodes with demand, else 0
  std::vector<double> started;       // y_i = g_i (1 - outside_prob_i)
  // Throughput x_i; at the destination the absorbed flow.
  std::vector<double> entering_flow;
  std::vector<double> arc_flow;
  int inner_iterations = 0;
  double inner_residual = 0.0;
  bool inner_converged = true;
};

// Transition probabilities, start probabilities and flows for one
// commodity given its converged tau. `outside_cost` is per node (only
// read where demand > 0).
CommoditySolution FlowsForDestination(const Network& network, std::span<const double> tau,
                                      std::span<const double> costs, double beta_t,
                                      std::span<const double> demand,
                                      std::span<const double> outside_cost,
                                      double beta_t_out, NodeIndex destination);

struct EquilibriumSolution {
  std::vector<double> total_flow;  // f at which the reported times hold
  std::vector<double> arc_time;    // latency(f)
  std::vector<double> arc_delay;   // latency(f) - free time
  // Same order as Instance::commodities().
  std::vector<CommoditySolution> commodities;
  // stratum_flow[s][a] = sum over destinations of v.
  std::vector<std::vector<double>> stratum_flow;
  std::vector<IterationRecord> log;
  int outer_iterations = 0;
  double outer_residual = 0.0;
  bool converged = false;
  bool inner_converged = true;
  double max_inner_residual = 0.0;

  bool fully_converged() const { return converged && inner_converged; }
};

// Damped fixed-point iteration on arc flows. `initial_flow` may be empty
// (start from zero flow).
EquilibriumSolution SolveEquilibrium(const Instance& instance, const ExpandedPrices& prices,
                                     const SolverOptions& options,
                                     std::span<const double> initial_flow = {});
// Uses instance.solver().
EquilibriumSolution SolveEquilibrium(const Instance& instance, const ExpandedPrices& prices);

struct EquilibriumDiagnostics {
  // max_a |f_a - sum v_a|.
  double flow_residual = 0.0;
  // Per commodity tau fixed-point residual at the reported times.
  std::vector<double> tau_residual;
  double max_tau_residual = 0.0;
  // max_a |latency^{-1}(t_a) - sum v_a| and the same scaled by max(1, f_a).
  double gradient_residual = 0.0;
  double gradient_residual_relative = 0.0;
  // max over commodities of |absorbed - started| / max(1, started).
  double mass_balance_error = 0.0;
  // max over commodities and nodes of tau - shortest generalized cost
  // (should be <= 0).
  double tau_bound_excess = 0.0;
  bool converged = false;
};

EquilibriumDiagnostics EquilibriumResiduals(const Instance& instance,
                                            const ExpandedPrices& prices,
                                            const EquilibriumSolution& solution);

struct ImplicitDerivativeCheck {
  std::size_t commodity = 0;
  ArcIndex arc = 0;
  double finite_difference = 0.0;  // sum_i y_i dtau_i / dt_a
  double arc_flow = 0.0;           // v_a
  double relative_error = 0.0;     // |fd - v| / max(1, v)
};

// Central-difference check of d(sum_i y_i tau_i)/dt_a = v_a with flows and
// start probabilities frozen at `solution`. Empty `arcs` checks every arc.
std::vector<ImplicitDerivativeCheck> CheckImplicitDerivative(
    const Instance& instance, const ExpandedPrices& prices,
    const EquilibriumSolution& solution, std::size_t commodity, double h,
    std::span<const ArcIndex> arcs = {});

}  // namespace mte

#endif  // MTE_EQUILIBRIUM_HPP_
