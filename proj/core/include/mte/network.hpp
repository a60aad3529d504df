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

#ifndef MTE_NETWORK_HPP_
#define MTE_NETWORK_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace mte {

using NodeIndex = std::size_t;
using ArcIndex = std::size_t;

enum class RoadClass { kPrimary, kSecondary };

const char* RoadClassName(RoadClass road_class);
RoadClass ParseRoadClass(const std::string& name);

struct Node {
  std::string id;
  double x = 0.0;
  double y = 0.0;
};

// A directed road segment. `free_time` is expressed in the instance time
// unit; `capacity` in vehicles.
struct Arc {
  std::string id;
  std::string tail;
  std::string head;
  double length_km = 0.0;
  double free_speed_kmh = 0.0;
  int lanes = 1;
  RoadClass road_class = RoadClass::kSecondary;
  double capacity = 0.0;
  double bpr_gamma = 0.02;
  double bpr_nu = 2.0;
  double free_time = 0.0;

  bool is_primary() const { return road_class == RoadClass::kPrimary; }
};

// Immutable directed graph with outgoing/incoming arc indexes.
class Network {
 public:
  Network() = default;

  // Throws ValidationError on duplicate ids, dangling endpoints or
  // nonpositive length/capacity/free time.
  static Network Build(std::vector<Node> nodes, std::vector<Arc> arcs);

  std::size_t num_nodes() const { return nodes_.size(); }
  std::size_t num_arcs() const { return arcs_.size(); }

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  const Node& node(NodeIndex i) const { return nodes_[i]; }
  const Arc& arc(ArcIndex a) const { return arcs_[a]; }

  NodeIndex tail(ArcIndex a) const { return tail_[a]; }
  NodeIndex head(ArcIndex a) const { return head_[a]; }

  std::span<const ArcIndex> out_arcs(NodeIndex i) const {
    return {out_arcs_.data() + out_offsets_[i],
            out_offsets_[i + 1] - out_offsets_[i]};
  }
  std::span<const ArcIndex> in_arcs(NodeIndex i) const {
    return {in_arcs_.data() + in_offsets_[i],
            in_offsets_[i + 1] - in_offsets_[i]};
  }

  // Throws ValidationError for an unknown id.
  NodeIndex node_index(const std::string& id) const;
  bool has_node(const std::string& id) const {
    return node_lookup_.count(id) != 0;
  }

  bool IsStronglyConnected() const;

 private:
  std::vector<Node> nodes_;
  std::vector<Arc> arcs_;
  std::vector<NodeIndex> tail_;
  std::vector<NodeIndex> head_;
  std::vector<std::size_t> out_offsets_;
  std::vector<ArcIndex> out_arcs_;
  std::vector<std::size_t> in_offsets_;
  std::vector<ArcIndex> in_arcs_;
  std::unordered_map<std::string, NodeIndex> node_lookup_;
};

// Largest strongly connected component, then repeatedly drops nodes left
// without outgoing arcs. Ties between equally large components go to the
// one containing the lowest node index. Throws ValidationError when no
// component with at least one arc remains.
Network ExtractCore(const Network& network);

// BPR volume-delay function t0 * (1 + gamma * (flow / capacity)^nu).
double Latency(const Arc& arc, double flow);

// Derivative of Latency with respect to flow.
double LatencySlope(const Arc& arc, double flow);

// Flow at which Latency(arc, flow) == time. Requires time >= free_time.
double InverseLatency(const Arc& arc, double time);

// Latency(arc, flow) - free_time, evaluated without cancellation. At tiny
// flows Latency rounds to free_time and InverseLatency returns 0, so
// consistency checks invert the delay instead.
double CongestionDelay(const Arc& arc, double flow);
double InverseDelay(const Arc& arc, double delay);

// Distance-based toll: price * length, charged on primary arcs only.
double MonetaryCost(const Arc& arc, double price);

// lanes * length / car_length.
double DefaultCapacity(double lanes, double length_km, double car_length_km);

// Cost-to-destination under nonnegative per-arc costs (Dijkstra on the
// reversed graph). Throws Error if some node cannot reach `destination`.
std::vector<double> ShortestCosts(const Network& network,
                                  std::span<const double> arc_costs,
                                  NodeIndex destination);

}  // namespace mte

#endif  // MTE_NETWORK_HPP_
