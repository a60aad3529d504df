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

#include "mte/synthgen.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>

#include "json.hpp"
#include "mte/errors.hpp"

namespace mte {
namespace {

using json = nlohmann::json;

Arc MakeArc(std::size_t index, NodeIndex tail, NodeIndex head, double length, double speed,
            int lanes, RoadClass road_class, const InstanceDefaults& defaults) {
  Arc a;
  a.id = "a" + std::to_string(index);
  a.tail = std::to_string(tail);
  a.head = std::to_string(head);
  a.length_km = length;
  a.free_speed_kmh = speed;
  a.lanes = lanes;
  a.road_class = road_class;
  a.capacity = DefaultCapacity(lanes, length, defaults.car_length_km);
  a.bpr_gamma = defaults.bpr_gamma;
  a.bpr_nu = defaults.bpr_nu;
  a.free_time = length / speed * UnitsPerHour(defaults.time_unit);
  return a;
}

// splitmix64, used for portable sampling.
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : state_(seed) {}
  std::uint64_t Next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  // Uniform integer in [0, bound) by rejection.
  std::uint64_t Below(std::uint64_t bound) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t v;
    do {
      v = Next();
    } while (v >= limit);
    return v % bound;
  }

 private:
  std::uint64_t state_;
};

}  // namespace

std::vector<Stratum> DefaultStrata() {
  return {{"high", 1.0, 0.5, 1.2, 1.0},
          {"mid", 1.0, 0.7, 1.1, 1.0},
          {"low", 1.0, 1.0, 1.0, 1.0}};
}

Instance GenSingleOd() {
  InstanceDefaults defaults;
  defaults.time_unit = TimeUnit::kSeconds;
  std::vector<Node> nodes = {{"0", 0.0, 2.0}, {"1", 2.0, 2.0}, {"2", 1.0, 3.0},
                             {"3", 5.0, 0.0}};
  const auto secondary = RoadClass::kSecondary;
  const auto primary = RoadClass::kPrimary;
  std::vector<Arc> arcs = {
      MakeArc(0, 0, 1, 3.0, 40.0, 1, secondary, defaults),
      MakeArc(1, 1, 0, 3.0, 40.0, 1, secondary, defaults),
      MakeArc(2, 0, 2, 5.0, 80.0, 3, primary, defaults),
      MakeArc(3, 2, 1, 5.0, 80.0, 3, primary, defaults),
      MakeArc(4, 1, 3, 5.0, 80.0, 3, primary, defaults),
      MakeArc(5, 3, 0, 5.0, 80.0, 3, primary, defaults),
  };
  std::vector<DemandEntry> demand;
  for (const Stratum& s : DefaultStrata()) demand.push_back({s.name, "0", "3", 500.0});
  OutsideOption outside;
  outside.mode = OutsideMode::kFreeTimeMultiplier;
  outside.multiplier = 1.2;
  outside.ticket = 300.0;
  return Instance::Create(Network::Build(std::move(nodes), std::move(arcs)), DefaultStrata(),
                          std::move(demand), outside, defaults, SolverOptions{});
}

bool IsSecondaryLine(int k, int n) { return k % 3 == 0 || k == n - 1; }

Instance GenGrid(const GridGenSpec& spec, std::vector<std::string>* warnings) {
  if (spec.rows < 2 || spec.cols < 2) throw ValidationError("grid", "rows and cols must be >= 2");
  if (!(spec.min_distance_km >= 0.0)) {
    throw ValidationError("grid.min_distance_km", "must be >= 0");
  }
  if (spec.pairs_per_group < 1) throw ValidationError("grid.pairs_per_group", "must be >= 1");
  if (!(spec.trips > 0.0)) throw ValidationError("grid.trips", "must be > 0");
  if (!(spec.spacing_km > 0.0)) throw ValidationError("grid.spacing_km", "must be > 0");
  InstanceDefaults defaults;
  defaults.time_unit = spec.time_unit;
  const int rows = spec.rows, cols = spec.cols;
  auto id = [cols](int r, int c) { return static_cast<NodeIndex>(r * cols + c); };

  std::vector<Node> nodes;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      nodes.push_back({std::to_string(id(r, c)), c * spec.spacing_km,
                       (rows - 1 - r) * spec.spacing_km});
    }
  }
  std::vector<Arc> arcs;
  auto secondary_pair = [&](NodeIndex u, NodeIndex v) {
    arcs.push_back(MakeArc(arcs.size(), u, v, spec.secondary_length_km,
                           spec.secondary_speed_kmh, spec.secondary_lanes,
                           RoadClass::kSecondary, defaults));
    arcs.push_back(MakeArc(arcs.size(), v, u, spec.secondary_length_km,
                           spec.secondary_speed_kmh, spec.secondary_lanes,
                           RoadClass::kSecondary, defaults));
  };
  auto primary_arc = [&](NodeIndex u, NodeIndex v) {
    arcs.push_back(MakeArc(arcs.size(), u, v, spec.primary_length_km,
                           spec.primary_speed_kmh, spec.primary_lanes, RoadClass::kPrimary,
                           defaults));
  };
  int ordinal = 0;
  for (int r = 0; r < rows; ++r) {
    const bool secondary = IsSecondaryLine(r, rows);
    const bool east = !secondary && ordinal % 2 == 0;
    for (int c = 0; c + 1 < cols; ++c) {
      if (secondary) {
        secondary_pair(id(r, c), id(r, c + 1));
      } else if (east) {
        primary_arc(id(r, c), id(r, c + 1));
      } else {
        primary_arc(id(r, c + 1), id(r, c));
      }
    }
    if (!secondary) ++ordinal;
  }
  ordinal = 0;
  for (int c = 0; c < cols; ++c) {
    const bool secondary = IsSecondaryLine(c, cols);
    const bool north = !secondary && ordinal % 2 == 0;
    for (int r = 0; r + 1 < rows; ++r) {
      // Row r is north of row r + 1.
      if (secondary) {
        secondary_pair(id(r + 1, c), id(r, c));
      } else if (north) {
        primary_arc(id(r + 1, c), id(r, c));
      } else {
        primary_arc(id(r, c), id(r + 1, c));
      }
    }
    if (!secondary) ++ordinal;
  }
  Network network = Network::Build(std::move(nodes), std::move(arcs));

  // Candidate OD pairs by shortest distance, grouped by area pair.
  const AreaAssignment areas = AssignAreas(network, 2, 2);
  std::vector<double> lengths(network.num_arcs());
  for (ArcIndex a = 0; a < network.num_arcs(); ++a) lengths[a] = network.arc(a).length_km;
  std::map<std::pair<std::string, std::string>, std::vector<std::pair<NodeIndex, NodeIndex>>>
      groups;
  for (const std::string& from : areas.labels()) {
    for (const std::string& to : areas.labels()) groups[{from, to}];
  }
  for (NodeIndex d = 0; d < network.num_nodes(); ++d) {
    const std::vector<double> dist = ShortestCosts(network, lengths, d);
    for (NodeIndex i = 0; i < network.num_nodes(); ++i) {
      if (i != d && dist[i] >= spec.min_distance_km - 1e-9) {
        groups[{areas.label(i), areas.label(d)}].emplace_back(i, d);
      }
    }
  }
  Stream stream(spec.seed);
  std::vector<std::pair<NodeIndex, NodeIndex>> chosen;
  for (const std::string& from : areas.labels()) {
    for (const std::string& to : areas.labels()) {
      auto& pool = groups[{from, to}];
      std::sort(pool.begin(), pool.end());
      if (pool.empty()) {
        if (warnings) {
          warnings->push_back("no OD pair from area " + from + " to area " + to +
                              " meets the minimum distance; group skipped");
        }
        continue;
      }
      const std::size_t take =
          std::min(pool.size(), static_cast<std::size_t>(spec.pairs_per_group));
      for (std::size_t k = 0; k < take; ++k) {
        const std::size_t j = k + stream.Below(pool.size() - k);
        std::swap(pool[k], pool[j]);
        chosen.push_back(pool[k]);
      }
    }
  }
  std::sort(chosen.begin(), chosen.end());
  std::vector<DemandEntry> demand;
  for (const Stratum& s : DefaultStrata()) {
    for (const auto& [i, d] : chosen) {
      demand.push_back({s.name, network.node(i).id, network.node(d).id, spec.trips});
    }
  }
  OutsideOption outside;
  outside.mode = OutsideMode::kFreeTimeMultiplier;
  outside.multiplier = spec.outside_multiplier;
  outside.ticket = spec.ticket;
  return Instance::Create(std::move(network), DefaultStrata(), std::move(demand), outside,
                          defaults, SolverOptions{});
}

GridGenSpec ParseGridGenSpec(const std::string& json_text) {
  GridGenSpec spec;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ValidationError("grid", std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("grid", "expected an object");
  static const std::set<std::string> kKeys = {
      "rows", "cols", "spacing_km", "primary_length_km", "primary_speed_kmh",
      "primary_lanes", "secondary_length_km", "secondary_speed_kmh", "secondary_lanes",
      "min_distance_km", "pairs_per_group", "trips", "seed", "ticket", "outside_multiplier",
      "time_unit"};
  for (const auto& item : doc.items()) {
    if (!kKeys.count(item.key())) throw ValidationError("grid." + item.key(), "unknown key");
  }
  auto get = [&](const char* key, auto& field) {
    auto it = doc.find(key);
    if (it == doc.end()) return;
    try {
      field = it->get<std::decay_t<decltype(field)>>();
    } catch (const json::exception&) {
      throw ValidationError(std::string("grid.") + key, "wrong type");
    }
  };
  get("rows", spec.rows);
  get("cols", spec.cols);
  get("spacing_km", spec.spacing_km);
  get("primary_length_km", spec.primary_length_km);
  get("primary_speed_kmh", spec.primary_speed_kmh);
  get("primary_lanes", spec.primary_lanes);
  get("secondary_length_km", spec.secondary_length_km);
  get("secondary_speed_kmh", spec.secondary_speed_kmh);
  get("secondary_lanes", spec.secondary_lanes);
  get("min_distance_km", spec.min_distance_km);
  get("pairs_per_group", spec.pairs_per_group);
  get("trips", spec.trips);
  get("seed", spec.seed);
  get("ticket", spec.ticket);
  get("outside_multiplier", spec.outside_multiplier);
  if (doc.contains("time_unit")) {
    std::string unit;
    get("time_unit", unit);
    spec.time_unit = ParseTimeUnit(unit);
  }
  return spec;
}

std::string GridGenSpecToJson(const GridGenSpec& spec) {
  json doc = {{"rows", spec.rows},
              {"cols", spec.cols},
              {"spacing_km", spec.spacing_km},
              {"primary_length_km", spec.primary_length_km},
              {"primary_speed_kmh", spec.primary_speed_kmh},
              {"primary_lanes", spec.primary_lanes},
              {"secondary_length_km", spec.secondary_length_km},
              {"secondary_speed_kmh", spec.secondary_speed_kmh},
              {"secondary_lanes", spec.secondary_lanes},
              {"min_distance_km", spec.min_distance_km},
              {"pairs_per_group", spec.pairs_per_group},
              {"trips", spec.trips},
              {"seed", spec.seed},
              {"ticket", spec.ticket},
              {"outside_multiplier", spec.outside_multiplier},
              {"time_unit", TimeUnitName(spec.time_unit)}};
  return doc.dump(2) + "\n";
}

}  // namespace mte
