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

#include "mte/instance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "mte/errors.hpp"

namespace mte {
namespace {

void RequireFinite(double value, const std::string& path) {
  if (!std::isfinite(value)) throw ValidationError(path, "must be finite");
}

void ValidateSolver(const SolverOptions& s) {
  if (!(s.inner_tol > 0.0)) throw ValidationError("solver.inner_tol", "must be > 0");
  if (!(s.outer_tol > 0.0)) throw ValidationError("solver.outer_tol", "must be > 0");
  if (s.inner_max_iters < 1) {
    throw ValidationError("solver.inner_max_iters", "must be >= 1");
  }
  if (s.outer_max_iters < 1) {
    throw ValidationError("solver.outer_max_iters", "must be >= 1");
  }
  if (s.workers < 1) throw ValidationError("solver.workers", "must be >= 1");
}

}  // namespace

const char* TimeUnitName(TimeUnit unit) {
  switch (unit) {
    case TimeUnit::kHours: return "hours";
    case TimeUnit::kMinutes: return "minutes";
    case TimeUnit::kSeconds: return "seconds";
  }
  return "hours";
}

TimeUnit ParseTimeUnit(const std::string& name) {
  if (name == "hours") return TimeUnit::kHours;
  if (name == "minutes") return TimeUnit::kMinutes;
  if (name == "seconds") return TimeUnit::kSeconds;
  throw ValidationError("defaults.time_unit",
                        "expected hours, minutes or seconds, got \"" + name + "\"");
}

double UnitsPerHour(TimeUnit unit) {
  switch (unit) {
    case TimeUnit::kHours: return 1.0;
    case TimeUnit::kMinutes: return 60.0;
    case TimeUnit::kSeconds: return 3600.0;
  }
  return 1.0;
}

Instance Instance::Create(Network network, std::vector<Stratum> strata,
                          std::vector<DemandEntry> demand, OutsideOption outside,
                          InstanceDefaults defaults, SolverOptions solver) {
  if (network.num_nodes() == 0) throw ValidationError("nodes", "network is empty");
  if (!network.IsStronglyConnected()) {
    throw ValidationError("arcs", "network is not strongly connected; run "
                                  "core extraction first");
  }
  if (!(defaults.car_length_km > 0.0)) {
    throw ValidationError("defaults.car_length_km", "must be > 0");
  }
  ValidateSolver(solver);

  if (strata.empty()) throw ValidationError("strata", "at least one stratum required");
  std::map<std::string, std::size_t> stratum_lookup;
  for (std::size_t s = 0; s < strata.size(); ++s) {
    const Stratum& st = strata[s];
    const std::string where = "strata[" + std::to_string(s) + "]";
    if (st.name.empty()) throw ValidationError(where + ".name", "must be nonempty");
    if (!stratum_lookup.emplace(st.name, s).second) {
      throw ValidationError(where + ".name", "duplicate stratum \"" + st.name + "\"");
    }
    RequireFinite(st.beta_time, where + ".beta_t");
    RequireFinite(st.beta_price, where + ".beta_p");
    RequireFinite(st.outside_beta_time, where + ".beta_t_out");
    RequireFinite(st.outside_beta_price, where + ".beta_p_out");
    if (!(st.beta_time > 0.0)) {
      throw ValidationError(where + ".beta_t", "stratum \"" + st.name +
                                                   "\" needs beta_t > 0");
    }
    if (st.beta_price < 0.0 || st.outside_beta_time < 0.0 ||
        st.outside_beta_price < 0.0) {
      throw ValidationError(where, "sensitivities must be nonnegative");
    }
  }

  if (!(outside.multiplier > 0.0) || !std::isfinite(outside.multiplier)) {
    throw ValidationError("outside_option.multiplier", "must be positive");
  }
  if (!(outside.ticket >= 0.0) || !std::isfinite(outside.ticket)) {
    throw ValidationError("outside_option.ticket", "must be nonnegative");
  }
  std::map<std::pair<NodeIndex, NodeIndex>, const OutsideOdEntry*> table;
  for (std::size_t k = 0; k < outside.table.size(); ++k) {
    const auto& e = outside.table[k];
    const std::string where = "outside_option.table[" + std::to_string(k) + "]";
    if (!network.has_node(e.origin)) {
      throw ValidationError(where + ".origin", "unknown node \"" + e.origin + "\"");
    }
    if (!network.has_node(e.destination)) {
      throw ValidationError(where + ".destination",
                            "unknown node \"" + e.destination + "\"");
    }
    if (e.time && !(*e.time >= 0.0 && std::isfinite(*e.time))) {
      throw ValidationError(where + ".time", "must be nonnegative");
    }
    if (e.ticket && !(*e.ticket >= 0.0 && std::isfinite(*e.ticket))) {
      throw ValidationError(where + ".ticket", "must be nonnegative");
    }
    table[{network.node_index(e.origin), network.node_index(e.destination)}] = &e;
  }

  std::vector<OdDemand> rows;
  std::set<std::tuple<std::size_t, NodeIndex, NodeIndex>> seen;
  for (std::size_t k = 0; k < demand.size(); ++k) {
    const DemandEntry& e = demand[k];
    const std::string where = "demand[" + std::to_string(k) + "]";
    auto st = stratum_lookup.find(e.stratum);
    if (st == stratum_lookup.end()) {
      throw ValidationError(where + ".stratum", "unknown stratum \"" + e.stratum + "\"");
    }
    if (!network.has_node(e.origin)) {
      throw ValidationError(where + ".origin", "unknown node \"" + e.origin + "\"");
    }
    if (!network.has_node(e.destination)) {
      throw ValidationError(where + ".destination",
                            "unknown node \"" + e.destination + "\"");
    }
    if (e.origin == e.destination) {
      throw ValidationError(where, "origin equals destination");
    }
    if (!(e.trips > 0.0) || !std::isfinite(e.trips)) {
      throw ValidationError(where + ".trips", "must be positive and finite");
    }
    OdDemand row;
    row.stratum = st->second;
    row.origin = network.node_index(e.origin);
    row.destination = network.node_index(e.destination);
    row.trips = e.trips;
    if (!seen.emplace(row.stratum, row.origin, row.destination).second) {
      throw ValidationError(where, "duplicate demand for stratum \"" + e.stratum +
                                       "\" and this OD pair");
    }
    rows.push_back(row);
  }

  // Outside-option time and ticket per row.
  std::map<NodeIndex, std::vector<double>> free_shortest;
  std::vector<double> free_times(network.num_arcs());
  for (ArcIndex a = 0; a < network.num_arcs(); ++a) {
    free_times[a] = network.arc(a).free_time;
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    OdDemand& row = rows[k];
    auto it = table.find({row.origin, row.destination});
    const OutsideOdEntry* entry = it == table.end() ? nullptr : it->second;
    if (entry && entry->time) {
      row.outside_time = *entry->time;
    } else if (outside.mode == OutsideMode::kPerOdTable) {
      throw ValidationError("outside_option.table",
                            "missing time for OD (" + demand[k].origin + ", " +
                                demand[k].destination + ")");
    } else {
      auto sp = free_shortest.find(row.destination);
      if (sp == free_shortest.end()) {
        sp = free_shortest
                 .emplace(row.destination,
                          ShortestCosts(network, free_times, row.destination))
                 .first;
      }
      row.outside_time = outside.multiplier * sp->second[row.origin];
    }
    row.outside_ticket = entry && entry->ticket ? *entry->ticket : outside.ticket;
  }

  std::map<std::pair<std::size_t, NodeIndex>, std::vector<std::size_t>> groups;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    groups[{rows[k].stratum, rows[k].destination}].push_back(k);
  }

  Instance inst;
  inst.network_ = std::move(network);
  inst.strata_ = std::move(strata);
  inst.demand_ = std::move(demand);
  inst.outside_ = std::move(outside);
  inst.defaults_ = defaults;
  inst.solver_ = std::move(solver);
  inst.od_demand_ = std::move(rows);
  for (auto& [key, members] : groups) {
    inst.commodities_.push_back({key.first, key.second, std::move(members)});
  }
  return inst;
}

std::size_t Instance::stratum_index(const std::string& name) const {
  for (std::size_t s = 0; s < strata_.size(); ++s) {
    if (strata_[s].name == name) return s;
  }
  throw ValidationError("stratum", "unknown stratum \"" + name + "\"");
}

Instance Instance::WithDemandScaled(double factor) const {
  if (!(factor >= 0.0) || !std::isfinite(factor)) {
    throw ValidationError("factor", "demand scale must be nonnegative");
  }
  std::vector<DemandEntry> demand;
  for (const auto& e : demand_) {
    if (e.trips * factor > 0.0) {
      demand.push_back(e);
      demand.back().trips = e.trips * factor;
    }
  }
  return Create(network_, strata_, std::move(demand), outside_, defaults_, solver_);
}

Instance Instance::WithStrata(std::vector<Stratum> strata) const {
  if (strata.size() != strata_.size()) {
    throw ValidationError("strata", "stratum count must not change");
  }
  for (std::size_t s = 0; s < strata.size(); ++s) {
    if (strata[s].name != strata_[s].name) {
      throw ValidationError("strata", "stratum names must match");
    }
  }
  return Create(network_, std::move(strata), demand_, outside_, defaults_, solver_);
}

std::vector<double> OutsideCosts(const Instance& instance) {
  std::vector<double> costs;
  costs.reserve(instance.od_demand().size());
  for (const OdDemand& row : instance.od_demand()) {
    const Stratum& st = instance.strata()[row.stratum];
    if (!(st.outside_beta_time > 0.0)) {
      throw ValidationError("strata." + st.name + ".beta_t_out",
                            "outside cost needs beta_t_out > 0");
    }
    costs.push_back(row.outside_time +
                    st.outside_beta_price / st.outside_beta_time * row.outside_ticket);
  }
  return costs;
}

AreaAssignment::AreaAssignment(int rows, int cols, std::vector<std::size_t> node_cell)
    : rows_(rows), cols_(cols), node_cell_(std::move(node_cell)) {
  if (rows == 2 && cols == 2) {
    labels_ = {"N", "E", "W", "S"};
  } else {
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < cols; ++c) {
        labels_.push_back("r" + std::to_string(r) + "c" + std::to_string(c));
      }
    }
  }
}

const std::string& AreaAssignment::label(NodeIndex node) const {
  if (node >= node_cell_.size()) {
    throw ValidationError("areas", "node " + std::to_string(node) + " is unlabelled");
  }
  return labels_[node_cell_[node]];
}

AreaAssignment AssignAreas(const Network& network, int rows, int cols) {
  if (rows < 1 || cols < 1) throw ValidationError("areas", "rows and cols must be >= 1");
  if (network.num_nodes() == 0) throw ValidationError("areas", "empty network");
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const Node& n : network.nodes()) {
    if (!std::isfinite(n.x) || !std::isfinite(n.y)) {
      throw ValidationError("nodes." + n.id, "coordinates must be finite");
    }
    xmin = std::min(xmin, n.x);
    xmax = std::max(xmax, n.x);
    ymin = std::min(ymin, n.y);
    ymax = std::max(ymax, n.y);
  }
  const double width = xmax - xmin;
  const double height = ymax - ymin;
  if (width <= 0.0 && height <= 0.0) {
    throw ValidationError("areas", "degenerate bounding box: all nodes coincide");
  }
  auto cell_of = [](double offset, double extent, int count) -> int {
    if (extent <= 0.0 || count == 1) return 0;
    const int k = static_cast<int>(std::floor(offset / (extent / count)));
    return std::clamp(k, 0, count - 1);
  };
  std::vector<std::size_t> cells(network.num_nodes());
  for (NodeIndex i = 0; i < network.num_nodes(); ++i) {
    const Node& n = network.node(i);
    const int r = cell_of(ymax - n.y, height, rows);
    const int c = cell_of(n.x - xmin, width, cols);
    int cell = r * cols + c;
    cells[i] = static_cast<std::size_t>(cell);
  }
  // Row-major cell order for 2x2 is (top-left, top-right, bottom-left,
  // bottom-right) -> (N, E, W, S).
  return AreaAssignment(rows, cols, std::move(cells));
}

std::pair<int, int> ParseGridShape(const std::string& text) {
  const auto x = text.find_first_of("xX");
  try {
    if (x == std::string::npos) throw std::invalid_argument("no separator");
    std::size_t used = 0;
    const int rows = std::stoi(text.substr(0, x), &used);
    if (used != x) throw std::invalid_argument("rows");
    const std::string rest = text.substr(x + 1);
    const int cols = std::stoi(rest, &used);
    if (used != rest.size()) throw std::invalid_argument("cols");
    if (rows < 1 || cols < 1) throw std::invalid_argument("range");
    return {rows, cols};
  } catch (const std::exception&) {
    throw ValidationError("areas", "expected RxC with positive integers, got \"" +
                                       text + "\"");
  }
}

}  // namespace mte
