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

#include <algorithm>
#include <cmath>
#include <vector>

#include "mte/equilibrium.hpp"
#include "mte/errors.hpp"
#include "sparse_solve.hpp"

namespace mte {
namespace {

std::vector<double> CommodityCosts(const Instance& instance, const ExpandedPrices& prices,
                                   const EquilibriumSolution& solution,
                                   const CommoditySolution& sub) {
  const Network& net = instance.network();
  std::vector<double> rates(net.num_arcs());
  for (ArcIndex a = 0; a < net.num_arcs(); ++a) rates[a] = prices.rate(sub.stratum, a);
  return GeneralizedCosts(net, solution.arc_time, rates,
                          instance.strata()[sub.stratum].price_weight());
}

}  // namespace

EquilibriumDiagnostics EquilibriumResiduals(const Instance& instance,
                                            const ExpandedPrices& prices,
                                            const EquilibriumSolution& solution) {
  const Network& net = instance.network();
  const std::size_t m = net.num_arcs();
  if (solution.total_flow.size() != m || solution.arc_time.size() != m) {
    throw ValidationError("solution", "solution does not match the instance");
  }
  EquilibriumDiagnostics diag;
  diag.converged = solution.fully_converged();
  std::vector<double> loaded(m, 0.0);
  for (const CommoditySolution& sub : solution.commodities) {
    for (ArcIndex a = 0; a < m; ++a) loaded[a] += sub.arc_flow[a];

    const std::vector<double> costs = CommodityCosts(instance, prices, solution, sub);
    const double beta = instance.strata()[sub.stratum].beta_time;
    const double r = TauResidual(net, costs, sub.destination, beta, sub.tau);
    diag.tau_residual.push_back(r);
    diag.max_tau_residual = std::max(diag.max_tau_residual, r);

    double started = 0.0;
    for (double y : sub.started) started += y;
    const double absorbed = sub.entering_flow[sub.destination];
    diag.mass_balance_error = std::max(
        diag.mass_balance_error, std::abs(absorbed - started) / std::max(1.0, started));

    const std::vector<double> bound = ShortestCosts(net, costs, sub.destination);
    for (NodeIndex i = 0; i < net.num_nodes(); ++i) {
      diag.tau_bound_excess = std::max(diag.tau_bound_excess, sub.tau[i] - bound[i]);
    }
  }
  for (ArcIndex a = 0; a < m; ++a) {
    diag.flow_residual =
        std::max(diag.flow_residual, std::abs(solution.total_flow[a] - loaded[a]));
    const double inverse = solution.arc_delay.size() == m
                               ? InverseDelay(net.arc(a), solution.arc_delay[a])
                               : InverseLatency(net.arc(a), solution.arc_time[a]);
    const double g = std::abs(inverse - loaded[a]);
    diag.gradient_residual = std::max(diag.gradient_residual, g);
    diag.gradient_residual_relative = std::max(
        diag.gradient_residual_relative, g / std::max(1.0, solution.total_flow[a]));
  }
  return diag;
}

std::vector<ImplicitDerivativeCheck> CheckImplicitDerivative(
    const Instance& instance, const ExpandedPrices& prices,
    const EquilibriumSolution& solution, std::size_t commodity, double h,
    std::span<const ArcIndex> arcs) {
  if (commodity >= solution.commodities.size()) {
    throw ValidationError("commodity", "index out of range");
  }
  if (!(h > 0.0)) throw ValidationError("h", "step must be > 0");
  const Network& net = instance.network();
  const CommoditySolution& sub = solution.commodities[commodity];
  const double beta = instance.strata()[sub.stratum].beta_time;
  const NodeIndex d = sub.destination;
  const std::vector<double> costs = CommodityCosts(instance, prices, solution, sub);

  std::vector<double> tau = sub.tau;
  PolishTau(net, costs, d, beta, tau);

  // Arc flows implied by the polished tau with the started demand frozen.
  const std::vector<double> prob = ArcProbabilities(net, costs, d, beta, tau);
  const std::vector<double> x =
      internal::ChainSolver(net, d, prob).SolveFlow(sub.started);

  std::vector<ArcIndex> selected(arcs.begin(), arcs.end());
  if (selected.empty()) {
    for (ArcIndex a = 0; a < net.num_arcs(); ++a) selected.push_back(a);
  }
  std::vector<ImplicitDerivativeCheck> out;
  for (ArcIndex a : selected) {
    if (a >= net.num_arcs()) throw ValidationError("arcs", "arc index out of range");
    auto shifted = [&](double delta) {
      std::vector<double> c = costs;
      c[a] += delta;
      std::vector<double> t = tau;
      PolishTau(net, c, d, beta, t);
      double total = 0.0;
      for (NodeIndex i = 0; i < net.num_nodes(); ++i) total += sub.started[i] * t[i];
      return total;
    };
    ImplicitDerivativeCheck check;
    check.commodity = commodity;
    check.arc = a;
    check.finite_difference = (shifted(h) - shifted(-h)) / (2.0 * h);
    check.arc_flow = net.tail(a) == d ? 0.0 : std::max(0.0, x[net.tail(a)]) * prob[a];
    check.relative_error = std::abs(check.finite_difference - check.arc_flow) /
                           std::max(1.0, check.arc_flow);
    out.push_back(check);
  }
  return out;
}

}  // namespace mte
