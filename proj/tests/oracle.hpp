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

#ifndef MTE_TESTS_ORACLE_HPP_
#define MTE_TESTS_ORACLE_HPP_

// Straightforward long-double re-derivation of the equilibrium map, used
// as an independent reference. Dense and slow by design.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "mte/instance.hpp"
#include "mte/network.hpp"
#include "mte/pricing.hpp"
#include "test_support.hpp"

namespace mte::testing {

using Ld = long double;

inline Ld OracleLatency(const Arc& a, Ld f) {
  return a.free_time * (1 + a.bpr_gamma * std::pow(f / a.capacity, Ld(a.bpr_nu)));
}

inline std::vector<Ld> OracleShortest(const Network& net, const std::vector<Ld>& c,
                                      NodeIndex d) {
  std::vector<Ld> dist(net.num_nodes(), std::numeric_limits<Ld>::infinity());
  dist[d] = 0;
  for (std::size_t it = 0; it < net.num_nodes(); ++it) {
    for (ArcIndex a = 0; a < net.num_arcs(); ++a) {
      if (net.tail(a) == d) continue;
      dist[net.tail(a)] = std::min(dist[net.tail(a)], c[a] + dist[net.head(a)]);
    }
  }
  return dist;
}

// Jacobi sweeps tau <- phi(c + tau) until the update stalls.
inline std::vector<Ld> OracleTau(const Network& net, const std::vector<Ld>& c, NodeIndex d,
                                 Ld beta, int max_sweeps = 200000) {
  std::vector<Ld> tau = OracleShortest(net, c, d);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    std::vector<Ld> next(tau.size(), 0);
    Ld change = 0;
    for (NodeIndex i = 0; i < net.num_nodes(); ++i) {
      if (i == d) continue;
      Ld zmin = std::numeric_limits<Ld>::infinity();
      for (ArcIndex a : net.out_arcs(i)) zmin = std::min(zmin, c[a] + tau[net.head(a)]);
      Ld sum = 0;
      for (ArcIndex a : net.out_arcs(i)) sum += std::exp(-beta * (c[a] + tau[net.head(a)] - zmin));
      next[i] = zmin - std::log(sum) / beta;
      change = std::max(change, std::fabs(next[i] - tau[i]));
    }
    Ld scale = 1;
    for (Ld v : next) scale = std::max(scale, std::fabs(v));
    tau = next;
    if (change < 1e-16L * scale) break;
  }
  return tau;
}

struct OracleCommodity {
  std::vector<Ld> tau;
  std::vector<Ld> prob;     // per arc
  std::vector<Ld> started;  // per node
  std::vector<Ld> x;
  std::vector<Ld> v;
};

inline OracleCommodity OracleFlows(const Instance& inst, const std::vector<Ld>& c,
                                   std::size_t stratum, NodeIndex d) {
  const Network& net = inst.network();
  const Stratum& st = inst.strata()[stratum];
  OracleCommodity out;
  out.tau = OracleTau(net, c, d, st.beta_time);
  out.prob.assign(net.num_arcs(), 0);
  for (ArcIndex a = 0; a < net.num_arcs(); ++a) {
    const NodeIndex i = net.tail(a);
    if (i == d) continue;
    out.prob[a] = std::exp(-Ld(st.beta_time) * (c[a] + out.tau[net.head(a)] - out.tau[i]));
  }
  out.started.assign(net.num_nodes(), 0);
  for (const OdDemand& od : inst.od_demand()) {
    if (od.stratum != stratum || od.destination != d) continue;
    const Ld c_out = Ld(od.outside_time) +
                     Ld(st.outside_beta_price) / st.outside_beta_time * od.outside_ticket;
    const Ld p_out =
        1 / (1 + std::exp(Ld(st.outside_beta_time) * c_out - st.beta_time * out.tau[od.origin]));
    out.started[od.origin] += od.trips * (1 - p_out);
  }
  // (I - P^T) x = y over transient nodes; the destination keeps the inflow.
  const std::size_t n = net.num_nodes();
  std::vector<std::vector<Ld>> a(n, std::vector<Ld>(n, 0));
  std::vector<Ld> b(n, 0);
  for (NodeIndex i = 0; i < n; ++i) {
    a[i][i] = 1;
    b[i] = out.started[i];
  }
  for (ArcIndex k = 0; k < net.num_arcs(); ++k) {
    const NodeIndex i = net.tail(k), j = net.head(k);
    if (i == d) continue;
    a[j][i] -= out.prob[k];
  }
  const auto x = DenseSolve(a, b);
  out.x.assign(x.begin(), x.end());
  out.v.assign(net.num_arcs(), 0);
  for (ArcIndex k = 0; k < net.num_arcs(); ++k) {
    if (net.tail(k) != d) out.v[k] = out.x[net.tail(k)] * out.prob[k];
  }
  return out;
}

inline std::vector<Ld> OracleCosts(const Instance& inst, const ExpandedPrices& prices,
                                   const std::vector<Ld>& t, std::size_t stratum) {
  const Network& net = inst.network();
  const Stratum& st = inst.strata()[stratum];
  std::vector<Ld> c(net.num_arcs());
  for (ArcIndex a = 0; a < net.num_arcs(); ++a) {
    const Arc& arc = net.arc(a);
    const Ld kappa = arc.is_primary() ? Ld(prices.rate(stratum, a)) * arc.length_km : 0;
    c[a] = t[a] + Ld(st.beta_price) / st.beta_time * kappa;
  }
  return c;
}

// Sum of all commodity arc flows at the times induced by `f`.
inline std::vector<Ld> OracleMap(const Instance& inst, const ExpandedPrices& prices,
                                 const std::vector<Ld>& f) {
  const Network& net = inst.network();
  std::vector<Ld> t(net.num_arcs());
  for (ArcIndex a = 0; a < net.num_arcs(); ++a) t[a] = OracleLatency(net.arc(a), f[a]);
  std::vector<Ld> total(net.num_arcs(), 0);
  for (const Commodity& c : inst.commodities()) {
    const auto sub = OracleFlows(inst, OracleCosts(inst, prices, t, c.stratum), c.stratum,
                                 c.destination);
    for (ArcIndex a = 0; a < net.num_arcs(); ++a) total[a] += sub.v[a];
  }
  return total;
}

// Damped iteration with step max(1/8, 1/(k+1)) halved on residual growth.
inline std::vector<Ld> OracleEquilibrium(const Instance& inst, const ExpandedPrices& prices,
                                         Ld tol, int max_iters, Ld* residual_out = nullptr) {
  std::vector<Ld> f(inst.network().num_arcs(), 0);
  Ld scale = 1, last = std::numeric_limits<Ld>::infinity(), residual = 0;
  for (int k = 0; k < max_iters; ++k) {
    const auto target = OracleMap(inst, prices, f);
    residual = 0;
    for (std::size_t a = 0; a < f.size(); ++a) residual = std::max(residual, std::fabs(f[a] - target[a]));
    if (residual <= tol) break;
    if (residual > last) scale = std::max(scale / 2, Ld(1) / 4096);
    last = residual;
    const Ld step = scale * std::max(Ld(0.125), Ld(1) / (k + 1));
    for (std::size_t a = 0; a < f.size(); ++a) f[a] -= step * (f[a] - target[a]);
  }
  if (residual_out) *residual_out = residual;
  return f;
}

}  // namespace mte::testing

#endif  // MTE_TESTS_ORACLE_HPP_
