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

#include "mte/equilibrium.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "mte/choice.hpp"
#include "mte/errors.hpp"
#include "parallel.hpp"
#include "sparse_solve.hpp"

namespace mte {
namespace {

constexpr double kResidualStall = 0.999;
constexpr double kAdaptiveFloor = 1.0 / 1024.0;

// Per-commodity inputs that do not change across outer iterations.
struct CommodityInput {
  std::vector<double> demand;
  std::vector<double> outside_cost;
};

std::vector<CommodityInput> BuildInputs(const Instance& instance) {
  const std::size_t n = instance.network().num_nodes();
  const std::vector<double> outside = OutsideCosts(instance);
  std::vector<CommodityInput> inputs;
  for (const Commodity& c : instance.commodities()) {
    CommodityInput in{std::vector<double>(n, 0.0),
                      std::vector<double>(n, std::numeric_limits<double>::infinity())};
    for (std::size_t row : c.rows) {
      const OdDemand& od = instance.od_demand()[row];
      in.demand[od.origin] += od.trips;
      in.outside_cost[od.origin] = outside[row];
    }
    inputs.push_back(std::move(in));
  }
  return inputs;
}

// kappa_a(p_a^s) for every stratum.
std::vector<std::vector<double>> MoneyCosts(const Instance& instance,
                                            const ExpandedPrices& prices) {
  const Network& net = instance.network();
  if (prices.num_strata() != instance.strata().size() ||
      prices.num_arcs() != net.num_arcs()) {
    throw ValidationError("prices", "price table does not match the instance");
  }
  std::vector<std::vector<double>> kappa(prices.num_strata(),
                                         std::vector<double>(net.num_arcs()));
  for (std::size_t s = 0; s < prices.num_strata(); ++s) {
    for (ArcIndex a = 0; a < net.num_arcs(); ++a) {
      kappa[s][a] = MonetaryCost(net.arc(a), prices.rate(s, a));
    }
  }
  return kappa;
}

std::vector<double> CostsFor(std::span<const double> arc_time,
                             const std::vector<double>& kappa, double weight) {
  std::vector<double> costs(arc_time.size());
  for (std::size_t a = 0; a < costs.size(); ++a) costs[a] = arc_time[a] + weight * kappa[a];
  return costs;
}

std::vector<double> Times(const Network& net, std::span<const double> flow) {
  std::vector<double> t(net.num_arcs());
  for (ArcIndex a = 0; a < net.num_arcs(); ++a) t[a] = Latency(net.arc(a), flow[a]);
  return t;
}

// One evaluation of the flow map at fixed arc times.
std::vector<CommoditySolution> Evaluate(const Instance& instance,
                                        const std::vector<CommodityInput>& inputs,
                                        const std::vector<std::vector<double>>& kappa,
                                        std::span<const double> arc_time,
                                        const SolverOptions& options) {
  const Network& net = instance.network();
  const auto& commodities = instance.commodities();
  std::vector<CommoditySolution> out(commodities.size());
  internal::ParallelFor(commodities.size(), options.workers, [&](std::size_t k) {
    const Commodity& c = commodities[k];
    const Stratum& st = instance.strata()[c.stratum];
    const std::vector<double> costs = CostsFor(arc_time, kappa[c.stratum], st.price_weight());
    TauResult tr = SolveTau(net, costs, c.destination, st.beta_time,
                            WarmStartTau(net, costs, c.destination), options);
    CommoditySolution sol =
        FlowsForDestination(net, tr.tau, costs, st.beta_time, inputs[k].demand,
                            inputs[k].outside_cost, st.outside_beta_time, c.destination);
    sol.stratum = c.stratum;
    sol.inner_iterations = tr.iterations;
    sol.inner_residual = tr.residual;
    sol.inner_converged = tr.converged;
    out[k] = std::move(sol);
  });
  return out;
}

std::vector<double> Aggregate(std::size_t num_arcs,
                              const std::vector<CommoditySolution>& subs) {
  std::vector<double> f(num_arcs, 0.0);
  for (const CommoditySolution& sub : subs) {
    for (ArcIndex a = 0; a < num_arcs; ++a) f[a] += sub.arc_flow[a];
  }
  return f;
}

}  // namespace

const char* StepRuleName(StepRule rule) {
  switch (rule) {
    case StepRule::kBaillon: return "baillon";
    case StepRule::kMsa: return "msa";
    case StepRule::kAdaptive: return "adaptive";
  }
  return "baillon";
}

StepRule ParseStepRule(const std::string& name) {
  if (name == "baillon") return StepRule::kBaillon;
  if (name == "msa") return StepRule::kMsa;
  if (name == "adaptive") return StepRule::kAdaptive;
  throw ValidationError("solver.step_rule", "unknown step rule \"" + name + "\"");
}

double StepSize(StepRule rule, int k) {
  const double harmonic = 1.0 / (k + 1.0);
  return rule == StepRule::kMsa ? harmonic : std::max(0.125, harmonic);
}

std::vector<double> GeneralizedCosts(const Network& network,
                                     std::span<const double> arc_time,
                                     std::span<const double> rates, double price_weight) {
  if (arc_time.size() != network.num_arcs() || rates.size() != network.num_arcs()) {
    throw ValidationError("costs", "per-arc vectors must match the network");
  }
  std::vector<double> costs(network.num_arcs());
  for (ArcIndex a = 0; a < network.num_arcs(); ++a) {
    costs[a] = arc_time[a] + price_weight * MonetaryCost(network.arc(a), rates[a]);
  }
  return costs;
}

std::vector<double> WarmStartTau(const Network& network, std::span<const double> costs,
                                 NodeIndex destination) {
  return ShortestCosts(network, costs, destination);
}

std::vector<double> NodeCostToGo(const Network& network, std::span<const double> costs,
                                 std::span<const double> tau, NodeIndex node) {
  const auto out = network.out_arcs(node);
  std::vector<double> z(out.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    z[k] = costs[out[k]] + tau[network.head(out[k])];
  }
  return z;
}

double TauResidual(const Network& network, std::span<const double> costs,
                   NodeIndex destination, double beta_t, std::span<const double> tau) {
  double r = 0.0;
  std::vector<double> z;
  for (NodeIndex i = 0; i < network.num_nodes(); ++i) {
    if (i == destination) continue;
    z = NodeCostToGo(network, costs, tau, i);
    r = std::max(r, std::abs(tau[i] - Phi(z, beta_t)));
  }
  return r;
}

TauResult SolveTau(const Network& network, std::span<const double> costs,
                   NodeIndex destination, double beta_t, std::vector<double> tau_init,
                   const SolverOptions& options) {
  const std::size_t n = network.num_nodes();
  if (tau_init.size() != n || costs.size() != network.num_arcs()) {
    throw ValidationError("tau", "size mismatch");
  }
  if (!(beta_t > 0.0)) throw ValidationError("beta_t", "must be > 0");
  TauResult result;
  result.tau = std::move(tau_init);
  std::vector<double>& tau = result.tau;
  tau[destination] = 0.0;
  for (double v : tau) {
    if (!std::isfinite(v)) throw ValidationError("tau_init", "must be finite");
  }
  std::vector<double> next(n, 0.0);
  std::vector<double> z;
  std::vector<double> history;  // residual per sweep
  int descending = 0;
  double prev_min = *std::min_element(tau.begin(), tau.end());
  for (int it = 1; it <= options.inner_max_iters; ++it) {
    double residual = 0.0;
    for (NodeIndex i = 0; i < n; ++i) {
      if (i == destination) continue;
      z = NodeCostToGo(network, costs, tau, i);
      next[i] = Phi(z, beta_t);
      residual = std::max(residual, std::abs(next[i] - tau[i]));
    }
    result.iterations = it;
    result.residual = residual;
    if (residual <= options.inner_tol) {
      result.converged = true;
      return result;  // tau is the iterate whose residual was measured
    }
    tau.swap(next);
    tau[destination] = 0.0;

    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (double v : tau) {
      lo = std::min(lo, v);
      hi = std::max(hi, std::abs(v));
    }
    if (!std::isfinite(hi) || hi > options.divergence_guard) {
      throw InfeasibleInstanceError(
          "instance outside feasibility set C: expected cost to destination " +
          network.node(destination).id + " exceeded the divergence guard");
    }
    history.push_back(residual);
    descending = lo < prev_min ? descending + 1 : 0;
    prev_min = lo;
    const auto window = static_cast<std::size_t>(options.divergence_window);
    if (window > 0 && descending >= options.divergence_window &&
        history.size() > window &&
        residual >= kResidualStall * history[history.size() - 1 - window]) {
      throw InfeasibleInstanceError(
          "instance outside feasibility set C: expected cost to destination " +
          network.node(destination).id + " decreases without bound");
    }
  }
  // Cap reached: report the residual of the returned iterate.
  result.residual = TauResidual(network, costs, destination, beta_t, tau);
  result.converged = result.residual <= options.inner_tol;
  return result;
}

std::vector<double> ArcProbabilities(const Network& network, std::span<const double> costs,
                                     NodeIndex destination, double beta_t,
                                     std::span<const double> tau) {
  std::vector<double> prob(network.num_arcs(), 0.0);
  std::vector<double> p;
  for (NodeIndex i = 0; i < network.num_nodes(); ++i) {
    if (i == destination) continue;
    const auto out = network.out_arcs(i);
    if (out.empty()) continue;
    p = TransitionProbs(NodeCostToGo(network, costs, tau, i), beta_t);
    for (std::size_t k = 0; k < out.size(); ++k) prob[out[k]] = p[k];
  }
  return prob;
}

double PolishTau(const Network& network, std::span<const double> costs,
                 NodeIndex destination, double beta_t, std::vector<double>& tau,
                 int max_steps) {
  const std::size_t n = network.num_nodes();
  double residual = TauResidual(network, costs, destination, beta_t, tau);
  std::vector<double> rhs(n, 0.0);
  for (int step = 0; step < max_steps && residual > 0.0; ++step) {
    const std::vector<double> prob =
        ArcProbabilities(network, costs, destination, beta_t, tau);
    internal::ChainSolver chain(network, destination, prob);
    for (NodeIndex i = 0; i < n; ++i) {
      rhs[i] = i == destination
                   ? 0.0
                   : Phi(NodeCostToGo(network, costs, tau, i), beta_t) - tau[i];
    }
    const std::vector<double> delta = chain.SolveExpectation(rhs);
    std::vector<double> candidate = tau;
    for (NodeIndex i = 0; i < n; ++i) candidate[i] += delta[i];
    candidate[destination] = 0.0;
    const double r = TauResidual(network, costs, destination, beta_t, candidate);
    if (!(r < residual)) break;
    tau.swap(candidate);
    residual = r;
  }
  return residual;
}

CommoditySolution FlowsForDestination(const Network& network, std::span<const double> tau,
                                      std::span<const double> costs, double beta_t,
                                      std::span<const double> demand,
                                      std::span<const double> outside_cost,
                                      double beta_t_out, NodeIndex destination) {
  const std::size_t n = network.num_nodes();
  if (tau.size() != n || demand.size() != n || outside_cost.size() != n) {
    throw ValidationError("flows", "per-node vectors must match the network");
  }
  CommoditySolution sol;
  sol.destination = destination;
  sol.tau.assign(tau.begin(), tau.end());
  sol.arc_prob = ArcProbabilities(network, costs, destination, beta_t, tau);
  sol.demand.assign(demand.begin(), demand.end());
  sol.outside_prob.assign(n, 0.0);
  sol.started.assign(n, 0.0);
  for (NodeIndex i = 0; i < n; ++i) {
    if (demand[i] <= 0.0 || i == destination) continue;
    const double p = OutsideProb(outside_cost[i], NodeCostToGo(network, costs, tau, i),
                                 beta_t, beta_t_out);
    sol.outside_prob[i] = p;
    sol.started[i] = demand[i] * (1.0 - p);
  }
  internal::ChainSolver chain(network, destination, sol.arc_prob);
  sol.entering_flow = chain.SolveFlow(sol.started);
  sol.arc_flow.assign(network.num_arcs(), 0.0);
  double absorbed = 0.0;
  for (ArcIndex a = 0; a < network.num_arcs(); ++a) {
    const NodeIndex i = network.tail(a);
    if (i == destination) continue;
    sol.entering_flow[i] = std::max(0.0, sol.entering_flow[i]);
    const double v = sol.entering_flow[i] * sol.arc_prob[a];
    if (!std::isfinite(v)) throw Error("non-finite arc flow");
    sol.arc_flow[a] = v;
    if (network.head(a) == destination) absorbed += v;
  }
  sol.entering_flow[destination] = absorbed;
  return sol;
}

EquilibriumSolution SolveEquilibrium(const Instance& instance, const ExpandedPrices& prices) {
  return SolveEquilibrium(instance, prices, instance.solver());
}

EquilibriumSolution SolveEquilibrium(const Instance& instance, const ExpandedPrices& prices,
                                     const SolverOptions& options,
                                     std::span<const double> initial_flow) {
  const Network& net = instance.network();
  const std::size_t m = net.num_arcs();
  if (!(options.outer_tol > 0.0) || !(options.inner_tol > 0.0) ||
      options.outer_max_iters < 1 || options.inner_max_iters < 1) {
    throw ValidationError("solver", "tolerances must be > 0 and caps >= 1");
  }
  const auto inputs = BuildInputs(instance);
  const auto kappa = MoneyCosts(instance, prices);

  std::vector<double> f(m, 0.0);
  if (!initial_flow.empty()) {
    if (initial_flow.size() != m) throw ValidationError("initial_flow", "size mismatch");
    for (ArcIndex a = 0; a < m; ++a) {
      if (!(initial_flow[a] >= 0.0) || !std::isfinite(initial_flow[a])) {
        throw ValidationError("initial_flow", "flows must be finite and nonnegative");
      }
      f[a] = initial_flow[a];
    }
  }

  EquilibriumSolution sol;
  const auto start = std::chrono::steady_clock::now();
  double factor = 1.0;
  double last_residual = std::numeric_limits<double>::infinity();
  std::vector<CommoditySolution> subs;
  std::vector<double> times;
  for (int k = 0; k < options.outer_max_iters; ++k) {
    times = Times(net, f);
    subs = Evaluate(instance, inputs, kappa, times, options);
    const std::vector<double> target = Aggregate(m, subs);
    double residual = 0.0;
    for (ArcIndex a = 0; a < m; ++a) residual = std::max(residual, std::abs(f[a] - target[a]));

    IterationRecord rec;
    rec.iteration = k;
    rec.residual = residual;
    for (const auto& s : subs) {
      rec.max_inner_iterations = std::max(rec.max_inner_iterations, s.inner_iterations);
    }
    sol.outer_iterations = k + 1;
    sol.outer_residual = residual;
    if (residual <= options.outer_tol) {
      sol.converged = true;
    } else {
      if (options.step_rule == StepRule::kAdaptive && residual > last_residual) {
        factor = std::max(kAdaptiveFloor, factor / 2.0);
      }
      const double base = StepSize(options.step_rule, k);
      rec.step = options.step_rule == StepRule::kAdaptive ? factor * base : base;
      for (ArcIndex a = 0; a < m; ++a) {
        f[a] -= rec.step * (f[a] - target[a]);
        if (!std::isfinite(f[a])) throw Error("non-finite flow in outer iteration");
        f[a] = std::max(0.0, f[a]);
      }
    }
    last_residual = residual;
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    sol.log.push_back(rec);
    if (options.on_iteration) options.on_iteration(rec);
    if (sol.converged) break;
  }
  if (!sol.converged) {
    // Report probabilities and flows consistent with the final flow vector.
    times = Times(net, f);
    subs = Evaluate(instance, inputs, kappa, times, options);
  }

  sol.arc_delay.resize(m);
  for (ArcIndex a = 0; a < m; ++a) sol.arc_delay[a] = CongestionDelay(net.arc(a), f[a]);
  sol.total_flow = std::move(f);
  sol.arc_time = std::move(times);
  sol.stratum_flow.assign(instance.strata().size(), std::vector<double>(m, 0.0));
  for (const CommoditySolution& s : subs) {
    for (ArcIndex a = 0; a < m; ++a) sol.stratum_flow[s.stratum][a] += s.arc_flow[a];
    sol.inner_converged = sol.inner_converged && s.inner_converged;
    sol.max_inner_residual = std::max(sol.max_inner_residual, s.inner_residual);
  }
  sol.commodities = std::move(subs);
  return sol;
}

}  // namespace mte
