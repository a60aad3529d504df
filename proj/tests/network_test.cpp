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
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "mte/errors.hpp"
#include "mte/network.hpp"
#include "test_support.hpp"

namespace mte {
namespace {

using testing::ArcInit;
using testing::Gen;
using testing::MakeNetwork;

Arc BprArc(double t0, double gamma, double nu, double capacity) {
  Arc a;
  a.id = "x";
  a.free_time = t0;
  a.bpr_gamma = gamma;
  a.bpr_nu = nu;
  a.capacity = capacity;
  a.length_km = 1.0;
  return a;
}

// Reachability oracle: DFS along out arcs (forward) or in arcs.
std::vector<bool> Reach(const Network& net, NodeIndex start, bool forward) {
  std::vector<bool> seen(net.num_nodes(), false);
  std::vector<NodeIndex> stack = {start};
  seen[start] = true;
  while (!stack.empty()) {
    const NodeIndex i = stack.back();
    stack.pop_back();
    const auto arcs = forward ? net.out_arcs(i) : net.in_arcs(i);
    for (ArcIndex a : arcs) {
      const NodeIndex j = forward ? net.head(a) : net.tail(a);
      if (!seen[j]) {
        seen[j] = true;
        stack.push_back(j);
      }
    }
  }
  return seen;
}

bool StronglyConnectedOracle(const Network& net) {
  const auto f = Reach(net, 0, true);
  const auto b = Reach(net, 0, false);
  return std::all_of(f.begin(), f.end(), [](bool x) { return x; }) &&
         std::all_of(b.begin(), b.end(), [](bool x) { return x; });
}

TEST(NetworkBuild, MinimalCycle) {
  const Network net = MakeNetwork({{0, 0}, {1, 0}}, {{"0", "1"}, {"1", "0"}});
  EXPECT_EQ(net.out_arcs(0).size(), 1u);
  EXPECT_EQ(net.out_arcs(1).size(), 1u);
  EXPECT_EQ(net.in_arcs(0).size(), 1u);
  EXPECT_TRUE(net.IsStronglyConnected());
}

TEST(NetworkBuild, UnknownEndpointIsRejected) {
  EXPECT_THROW(MakeNetwork({{0, 0}, {1, 0}}, {{"0", "99"}}), ValidationError);
}

TEST(NetworkBuild, DuplicateIdsAreRejected) {
  std::vector<Node> nodes = {{"a", 0, 0}, {"a", 1, 0}};
  EXPECT_THROW(Network::Build(nodes, {}), ValidationError);
}

TEST(NetworkBuild, ParallelArcsAreKept) {
  const Network net =
      MakeNetwork({{0, 0}, {1, 0}}, {{"0", "1"}, {"0", "1", 2.0}, {"1", "0"}});
  EXPECT_EQ(net.out_arcs(0).size(), 2u);
}

TEST(NetworkBuild, AdjacencyMatchesArcListOnRandomGraphs) {
  Gen gen(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Network net = testing::RandomNetwork(gen, gen.Int(2, 12), gen.Int(0, 20));
    std::size_t out_total = 0;
    for (NodeIndex i = 0; i < net.num_nodes(); ++i) {
      for (ArcIndex a : net.out_arcs(i)) EXPECT_EQ(net.tail(a), i);
      for (ArcIndex a : net.in_arcs(i)) EXPECT_EQ(net.head(a), i);
      out_total += net.out_arcs(i).size();
    }
    EXPECT_EQ(out_total, net.num_arcs());
  }
}

TEST(ExtractCore, StronglyConnectedInputIsUnchanged) {
  const Network net =
      MakeNetwork({{0, 0}, {1, 0}, {1, 1}}, {{"0", "1"}, {"1", "2"}, {"2", "0"}});
  const Network core = ExtractCore(net);
  EXPECT_EQ(core.num_nodes(), 3u);
  EXPECT_EQ(core.num_arcs(), 3u);
}

TEST(ExtractCore, DropsDanglingSink) {
  const Network net = MakeNetwork({{0, 0}, {1, 0}, {1, 1}, {5, 5}},
                                  {{"0", "1"}, {"1", "2"}, {"2", "0"}, {"2", "3"}});
  const Network core = ExtractCore(net);
  EXPECT_EQ(core.num_nodes(), 3u);
  EXPECT_EQ(core.num_arcs(), 3u);
  EXPECT_FALSE(core.has_node("3"));
}

TEST(ExtractCore, KeepsLargerOfTwoCycles) {
  const Network net = MakeNetwork({{0, 0}, {1, 0}, {2, 0}, {3, 0}, {4, 0}},
                                  {{"3", "4"}, {"4", "3"}, {"0", "1"}, {"1", "2"}, {"2", "0"}});
  const Network core = ExtractCore(net);
  EXPECT_EQ(core.num_nodes(), 3u);
  EXPECT_TRUE(core.has_node("0") && core.has_node("1") && core.has_node("2"));
}

TEST(ExtractCore, NoCycleIsAnError) {
  const Network net = MakeNetwork({{0, 0}, {1, 0}}, {{"0", "1"}});
  EXPECT_THROW(ExtractCore(net), ValidationError);
}

TEST(ExtractCore, OutputIsStronglyConnectedOnRandomDigraphs) {
  Gen gen(5);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = gen.Int(2, 14);
    std::vector<std::pair<double, double>> coords(n, {0.0, 0.0});
    std::vector<ArcInit> arcs;
    const int m = gen.Int(1, 3 * n);
    for (int k = 0; k < m; ++k) {
      const int t = gen.Int(0, n - 1);
      const int h = gen.Int(0, n - 1);
      if (t != h) arcs.push_back({std::to_string(t), std::to_string(h)});
    }
    const Network net = MakeNetwork(coords, arcs);
    Network core;
    try {
      core = ExtractCore(net);
    } catch (const ValidationError&) {
      continue;
    }
    EXPECT_TRUE(StronglyConnectedOracle(core));
    EXPECT_TRUE(core.IsStronglyConnected());
    for (NodeIndex i = 0; i < core.num_nodes(); ++i) EXPECT_GE(core.out_arcs(i).size(), 1u);
    // Maximality: no other node of the input shares a cycle with the core.
    const NodeIndex anchor = net.node_index(core.node(0).id);
    const auto f = Reach(net, anchor, true);
    const auto b = Reach(net, anchor, false);
    std::size_t scc = 0;
    for (std::size_t i = 0; i < f.size(); ++i) scc += f[i] && b[i];
    EXPECT_EQ(scc, core.num_nodes());
  }
}

TEST(Latency, BprValues) {
  const Arc a = BprArc(10, 0.02, 2, 100);
  EXPECT_DOUBLE_EQ(Latency(a, 0), 10.0);
  EXPECT_NEAR(Latency(a, 100), 10.2, 1e-12);
  EXPECT_NEAR(Latency(a, 200), 10.8, 1e-12);
  EXPECT_THROW(Latency(a, -1), ValidationError);
}

TEST(Latency, InverseValues) {
  const Arc a = BprArc(10, 0.02, 2, 100);
  EXPECT_DOUBLE_EQ(InverseLatency(a, 10.0), 0.0);
  EXPECT_NEAR(InverseLatency(a, 10.2), 100.0, 1e-9);
  EXPECT_THROW(InverseLatency(a, 9.0), ValidationError);
}

TEST(Latency, MonotoneAndInvertibleOnRandomArcs) {
  Gen gen(7);
  for (int trial = 0; trial < 500; ++trial) {
    const Arc a = BprArc(gen.Uniform(0.01, 100), gen.Uniform(0.001, 1), gen.Uniform(0.5, 5),
                         gen.Uniform(1, 5000));
    const double f1 = gen.Uniform(0, 10000);
    const double f2 = f1 + gen.Uniform(1e-3, 1000);
    EXPECT_LT(Latency(a, f1), Latency(a, f2));
    const double back = InverseLatency(a, Latency(a, f1));
    EXPECT_LE(std::fabs(back - f1), 1e-9 * std::max(1.0, f1)) << f1;
    const double t = Latency(a, f1) + gen.Uniform(0, 10);
    EXPECT_LE(std::fabs(Latency(a, InverseLatency(a, t)) - t), 1e-10 * t);
  }
}

TEST(Latency, DelayInvertsAtTinyFlows) {
  const Arc a = BprArc(72, 0.02, 2, 120);
  // The latency itself rounds to the free time here.
  EXPECT_EQ(Latency(a, 3e-6), 72.0);
  EXPECT_EQ(InverseLatency(a, Latency(a, 3e-6)), 0.0);
  EXPECT_GT(CongestionDelay(a, 3e-6), 0.0);
  EXPECT_NEAR(InverseDelay(a, CongestionDelay(a, 3e-6)), 3e-6, 1e-20);
  EXPECT_EQ(InverseDelay(a, 0.0), 0.0);
  EXPECT_THROW(InverseDelay(a, -1.0), ValidationError);
  EXPECT_THROW(CongestionDelay(a, -1.0), ValidationError);

  Gen gen(9);
  for (int trial = 0; trial < 500; ++trial) {
    const Arc b = BprArc(gen.Uniform(0.01, 100), gen.Uniform(0.001, 1), gen.Uniform(0.5, 5),
                         gen.Uniform(1, 5000));
    const double f = std::pow(10.0, gen.Uniform(-12, 4));
    EXPECT_LE(std::fabs(InverseDelay(b, CongestionDelay(b, f)) - f), 1e-12 * f) << f;
    EXPECT_NEAR(b.free_time + CongestionDelay(b, f), Latency(b, f), 1e-14 * Latency(b, f));
  }
}

TEST(Latency, SlopeMatchesCentralDifference) {
  Gen gen(8);
  for (int trial = 0; trial < 200; ++trial) {
    const Arc a = BprArc(gen.Uniform(0.1, 10), gen.Uniform(0.001, 1), gen.Uniform(1, 4),
                         gen.Uniform(10, 1000));
    const double f = gen.Uniform(1, 2000);
    const double h = 1e-4 * std::max(1.0, f);
    const double fd = (Latency(a, f + h) - Latency(a, f - h)) / (2 * h);
    EXPECT_NEAR(LatencySlope(a, f), fd, 1e-6 * std::max(1.0, std::fabs(fd)));
  }
}

TEST(MonetaryCost, PrimaryOnly) {
  Arc a = BprArc(1, 0.02, 2, 10);
  a.length_km = 2.0;
  a.road_class = RoadClass::kSecondary;
  EXPECT_EQ(MonetaryCost(a, 1000), 0.0);
  a.road_class = RoadClass::kPrimary;
  EXPECT_DOUBLE_EQ(MonetaryCost(a, 100), 200.0);
  EXPECT_EQ(MonetaryCost(a, 0), 0.0);
  EXPECT_THROW(MonetaryCost(a, -1), ValidationError);
}

TEST(DefaultCapacity, LanesTimesLengthOverCar) {
  EXPECT_NEAR(DefaultCapacity(3, 5, 0.005), 3000.0, 1e-9);
  EXPECT_DOUBLE_EQ(DefaultCapacity(1, 0.005, 0.005), 1.0);
  EXPECT_THROW(DefaultCapacity(1, 1, 0), ValidationError);
}

TEST(ShortestCosts, LineGraph) {
  const Network net = MakeNetwork({{0, 0}, {1, 0}, {2, 0}},
                                  {{"0", "1"}, {"1", "2"}, {"2", "1"}, {"1", "0"}});
  const std::vector<double> c = {3, 4, 1, 1};
  const auto tau = ShortestCosts(net, c, 2);
  EXPECT_DOUBLE_EQ(tau[0], 7.0);
  EXPECT_DOUBLE_EQ(tau[1], 4.0);
  EXPECT_DOUBLE_EQ(tau[2], 0.0);
}

TEST(ShortestCosts, ParallelArcsTakeTheMinimum) {
  const Network net = MakeNetwork({{0, 0}, {1, 0}}, {{"0", "1"}, {"0", "1"}, {"1", "0"}});
  const std::vector<double> c = {5, 9, 0};
  EXPECT_DOUBLE_EQ(ShortestCosts(net, c, 1)[0], 5.0);
}

TEST(ShortestCosts, UnreachableDestinationIsReported) {
  const Network net = MakeNetwork({{0, 0}, {1, 0}}, {{"0", "1"}});
  EXPECT_THROW(ShortestCosts(net, std::vector<double>{1.0}, 0), Error);
}

TEST(ShortestCosts, AgreesWithBellmanFordAndSatisfiesBellmanEquation) {
  Gen gen(21);
  for (int trial = 0; trial < 50; ++trial) {
    const Network net = testing::RandomNetwork(gen, gen.Int(2, 15), gen.Int(0, 30));
    const auto c = gen.Vector(net.num_arcs(), 0.0, 10.0);
    const NodeIndex d = static_cast<NodeIndex>(gen.Int(0, static_cast<int>(net.num_nodes()) - 1));
    std::vector<double> bf(net.num_nodes(), std::numeric_limits<double>::infinity());
    bf[d] = 0;
    for (std::size_t it = 0; it < net.num_nodes(); ++it) {
      for (ArcIndex a = 0; a < net.num_arcs(); ++a) {
        bf[net.tail(a)] = std::min(bf[net.tail(a)], c[a] + bf[net.head(a)]);
      }
    }
    bf[d] = 0;
    const auto tau = ShortestCosts(net, c, d);
    for (NodeIndex i = 0; i < net.num_nodes(); ++i) {
      EXPECT_NEAR(tau[i], bf[i], 1e-9);
      if (i == d) continue;
      double best = std::numeric_limits<double>::infinity();
      for (ArcIndex a : net.out_arcs(i)) best = std::min(best, c[a] + tau[net.head(a)]);
      EXPECT_EQ(tau[i], best);
    }
  }
}

}  // namespace
}  // namespace mte
