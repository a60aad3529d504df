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

#include "mte/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <unordered_set>
#include <utility>

#include "mte/errors.hpp"

namespace mte {
namespace {

void BuildCsr(std::size_t num_nodes, const std::vector<NodeIndex>& key,
              std::vector<std::size_t>& offsets, std::vector<ArcIndex>& arcs) {
  offsets.assign(num_nodes + 1, 0);
  for (NodeIndex k : key) ++offsets[k + 1];
  for (std::size_t i = 0; i < num_nodes; ++i) offsets[i + 1] += offsets[i];
  arcs.resize(key.size());
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  for (ArcIndex a = 0; a < key.size(); ++a) arcs[cursor[key[a]]++] = a;
}

// Iterative Tarjan; returns component id per node.
std::vector<std::size_t> StronglyConnectedComponents(const Network& net,
                                                     std::size_t& count) {
  const std::size_t n = net.num_nodes();
  constexpr std::size_t kUnvisited = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0), comp(n, kUnvisited);
  std::vector<bool> on_stack(n, false);
  std::vector<NodeIndex> stack;
  // (node, position in out-arc list)
  std::vector<std::pair<NodeIndex, std::size_t>> call;
  std::size_t next_index = 0;
  count = 0;

  for (NodeIndex root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    call.emplace_back(root, 0);
    index[root] = low[root] = next_index++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      auto& [v, pos] = call.back();
      const auto out = net.out_arcs(v);
      if (pos < out.size()) {
        const NodeIndex w = net.head(out[pos++]);
        if (index[w] == kUnvisited) {
          index[w] = low[w] = next_index++;
          stack.push_back(w);
          on_stack[w] = true;
          call.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        NodeIndex w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp[w] = count;
        } while (w != v);
        ++count;
      }
      const NodeIndex finished = v;
      call.pop_back();
      if (!call.empty()) {
        NodeIndex parent = call.back().first;
        low[parent] = std::min(low[parent], low[finished]);
      }
    }
  }
  return comp;
}

std::vector<bool> Reachable(const Network& net, NodeIndex start, bool forward) {
  std::vector<bool> seen(net.num_nodes(), false);
  std::vector<NodeIndex> todo{start};
  seen[start] = true;
  while (!todo.empty()) {
    NodeIndex v = todo.back();
    todo.pop_back();
    const auto arcs = forward ? net.out_arcs(v) : net.in_arcs(v);
    for (ArcIndex a : arcs) {
      NodeIndex w = forward ? net.head(a) : net.tail(a);
      if (!seen[w]) {
        seen[w] = true;
        todo.push_back(w);
      }
    }
  }
  return seen;
}

}  // namespace

const char* RoadClassName(RoadClass road_class) {
  return road_class == RoadClass::kPrimary ? "primary" : "secondary";
}

RoadClass ParseRoadClass(const std::string& name) {
  if (name == "primary") return RoadClass::kPrimary;
  if (name == "secondary") return RoadClass::kSecondary;
  throw ValidationError("road_class",
                        "expected \"primary\" or \"secondary\", got \"" +
                            name + "\"");
}

Network Network::Build(std::vector<Node> nodes, std::vector<Arc> arcs) {
  Network net;
  net.node_lookup_.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!net.node_lookup_.emplace(nodes[i].id, i).second) {
      throw ValidationError("nodes[" + std::to_string(i) + "].id",
                            "duplicate node id \"" + nodes[i].id + "\"");
    }
  }
  std::unordered_set<std::string> arc_ids;
  net.tail_.reserve(arcs.size());
  net.head_.reserve(arcs.size());
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    const Arc& arc = arcs[a];
    const std::string where = "arcs[" + std::to_string(a) + "]";
    if (!arc_ids.insert(arc.id).second) {
      throw ValidationError(where + ".id", "duplicate arc id \"" + arc.id + "\"");
    }
    auto tail = net.node_lookup_.find(arc.tail);
    if (tail == net.node_lookup_.end()) {
      throw ValidationError(where + ".tail", "unknown node \"" + arc.tail + "\"");
    }
    auto head = net.node_lookup_.find(arc.head);
    if (head == net.node_lookup_.end()) {
      throw ValidationError(where + ".head", "unknown node \"" + arc.head + "\"");
    }
    if (!(arc.length_km > 0.0) || !std::isfinite(arc.length_km)) {
      throw ValidationError(where + ".length_km", "must be positive and finite");
    }
    if (!(arc.capacity > 0.0) || !std::isfinite(arc.capacity)) {
      throw ValidationError(where + ".capacity", "must be positive and finite");
    }
    if (!(arc.free_time > 0.0) || !std::isfinite(arc.free_time)) {
      throw ValidationError(where + ".free_time", "must be positive and finite");
    }
    if (!(arc.bpr_gamma >= 0.0) || !(arc.bpr_nu > 0.0)) {
      throw ValidationError(where, "BPR parameters need gamma >= 0, nu > 0");
    }
    net.tail_.push_back(tail->second);
    net.head_.push_back(head->second);
  }
  net.nodes_ = std::move(nodes);
  net.arcs_ = std::move(arcs);
  BuildCsr(net.nodes_.size(), net.tail_, net.out_offsets_, net.out_arcs_);
  BuildCsr(net.nodes_.size(), net.head_, net.in_offsets_, net.in_arcs_);
  return net;
}

NodeIndex Network::node_index(const std::string& id) const {
  auto it = node_lookup_.find(id);
  if (it == node_lookup_.end()) {
    throw ValidationError("", "unknown node \"" + id + "\"");
  }
  return it->second;
}

bool Network::IsStronglyConnected() const {
  if (nodes_.empty()) return false;
  const auto fwd = Reachable(*this, 0, true);
  const auto bwd = Reachable(*this, 0, false);
  return std::all_of(fwd.begin(), fwd.end(), [](bool b) { return b; }) &&
         std::all_of(bwd.begin(), bwd.end(), [](bool b) { return b; });
}

Network ExtractCore(const Network& network) {
  std::size_t num_components = 0;
  const auto comp = StronglyConnectedComponents(network, num_components);
  std::vector<std::size_t> size(num_components, 0);
  for (std::size_t c : comp) ++size[c];

  // Components are numbered in completion order; pick the largest, breaking
  // ties by the smallest member node index.
  std::size_t best = num_components;
  for (NodeIndex i = 0; i < network.num_nodes(); ++i) {
    const std::size_t c = comp[i];
    if (best == num_components || size[c] > size[best]) best = c;
  }

  std::vector<bool> keep(network.num_nodes(), false);
  for (NodeIndex i = 0; i < network.num_nodes(); ++i) keep[i] = comp[i] == best;

  // Drop nodes with no outgoing arc inside the kept set until stable.
  bool changed = true;
  while (changed) {
    changed = false;
    for (NodeIndex i = 0; i < network.num_nodes(); ++i) {
      if (!keep[i]) continue;
      const auto out = network.out_arcs(i);
      const bool has_out = std::any_of(out.begin(), out.end(), [&](ArcIndex a) {
        return keep[network.head(a)];
      });
      if (!has_out) {
        keep[i] = false;
        changed = true;
      }
    }
  }

  std::vector<Node> nodes;
  for (NodeIndex i = 0; i < network.num_nodes(); ++i) {
    if (keep[i]) nodes.push_back(network.node(i));
  }
  if (nodes.empty()) {
    throw ValidationError("", "network has no strongly connected component "
                              "with at least one arc");
  }
  std::vector<Arc> arcs;
  for (ArcIndex a = 0; a < network.num_arcs(); ++a) {
    if (keep[network.tail(a)] && keep[network.head(a)]) {
      arcs.push_back(network.arc(a));
    }
  }
  return Network::Build(std::move(nodes), std::move(arcs));
}

double Latency(const Arc& arc, double flow) {
  if (!(flow >= 0.0)) {
    throw ValidationError("flow", "latency requires a nonnegative flow");
  }
  return arc.free_time *
         (1.0 + arc.bpr_gamma * std::pow(flow / arc.capacity, arc.bpr_nu));
}

double LatencySlope(const Arc& arc, double flow) {
  if (!(flow >= 0.0)) {
    throw ValidationError("flow", "latency requires a nonnegative flow");
  }
  if (flow == 0.0 && arc.bpr_nu < 1.0) {
    return std::numeric_limits<double>::infinity();
  }
  return arc.free_time * arc.bpr_gamma * arc.bpr_nu / arc.capacity *
         std::pow(flow / arc.capacity, arc.bpr_nu - 1.0);
}

double InverseLatency(const Arc& arc, double time) {
  if (!(time >= arc.free_time)) {
    throw ValidationError("time", "below the free-flow time of arc \"" +
                                      arc.id + "\"");
  }
  if (arc.bpr_gamma == 0.0) {
    if (time == arc.free_time) return 0.0;
    throw ValidationError("time", "arc \"" + arc.id +
                                      "\" has constant latency; inverse "
                                      "defined only at free time");
  }
  const double ratio = (time / arc.free_time - 1.0) / arc.bpr_gamma;
  return arc.capacity * std::pow(ratio, 1.0 / arc.bpr_nu);
}

double CongestionDelay(const Arc& arc, double flow) {
  if (!(flow >= 0.0)) {
    throw ValidationError("flow", "latency requires a nonnegative flow");
  }
  return arc.free_time * arc.bpr_gamma * std::pow(flow / arc.capacity, arc.bpr_nu);
}

double InverseDelay(const Arc& arc, double delay) {
  if (!(delay >= 0.0)) {
    throw ValidationError("delay", "negative delay on arc \"" + arc.id + "\"");
  }
  if (arc.bpr_gamma == 0.0) {
    if (delay == 0.0) return 0.0;
    throw ValidationError("delay", "arc \"" + arc.id +
                                       "\" has constant latency; inverse "
                                       "defined only at zero delay");
  }
  return arc.capacity * std::pow(delay / (arc.free_time * arc.bpr_gamma), 1.0 / arc.bpr_nu);
}

double MonetaryCost(const Arc& arc, double price) {
  if (!(price >= 0.0)) {
    throw ValidationError("price", "must be nonnegative");
  }
  return arc.is_primary() ? price * arc.length_km : 0.0;
}

double DefaultCapacity(double lanes, double length_km, double car_length_km) {
  if (!(lanes > 0.0) || !(length_km > 0.0) || !(car_length_km > 0.0)) {
    throw ValidationError("", "capacity inputs must be positive");
  }
  return lanes * length_km / car_length_km;
}

std::vector<double> ShortestCosts(const Network& network,
                                  std::span<const double> arc_costs,
                                  NodeIndex destination) {
  if (destination >= network.num_nodes()) {
    throw ValidationError("destination", "out of range");
  }
  if (arc_costs.size() != network.num_arcs()) {
    throw ValidationError("arc_costs", "size does not match arc count");
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(network.num_nodes(), kInf);
  std::vector<bool> done(network.num_nodes(), false);
  using Entry = std::pair<double, NodeIndex>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  dist[destination] = 0.0;
  heap.emplace(0.0, destination);
  while (!heap.empty()) {
    auto [d, j] = heap.top();
    heap.pop();
    if (done[j]) continue;
    done[j] = true;
    for (ArcIndex a : network.in_arcs(j)) {
      const double c = arc_costs[a];
      if (!(c >= 0.0)) {
        throw ValidationError("arc_costs[" + std::to_string(a) + "]",
                              "must be nonnegative");
      }
      const NodeIndex i = network.tail(a);
      if (i == destination) continue;
      const double cand = d + c;
      if (cand < dist[i]) {
        dist[i] = cand;
        heap.emplace(cand, i);
      }
    }
  }
  for (NodeIndex i = 0; i < network.num_nodes(); ++i) {
    if (dist[i] == kInf) {
      throw Error("node \"" + network.node(i).id +
                  "\" cannot reach destination \"" +
                  network.node(destination).id + "\"");
    }
  }
  return dist;
}

}  // namespace mte
