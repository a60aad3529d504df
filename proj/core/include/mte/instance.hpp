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

#ifndef MTE_INSTANCE_HPP_
#define MTE_INSTANCE_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mte/network.hpp"
#include "mte/solver_options.hpp"

namespace mte {

// Unit of every time quantity in an instance (arc free times, latencies,
// outside-option times, costs-to-go). Distances are km and speeds km/h
// regardless.
enum class TimeUnit { kHours, kMinutes, kSeconds };

const char* TimeUnitName(TimeUnit unit);
TimeUnit ParseTimeUnit(const std::string& name);
double UnitsPerHour(TimeUnit unit);

struct Stratum {
  std::string name;
  double beta_time = 1.0;
  double beta_price = 0.0;
  double outside_beta_time = 1.0;
  double outside_beta_price = 1.0;

  double price_weight() const { return beta_price / beta_time; }
};

struct DemandEntry {
  std::string stratum;
  std::string origin;
  std::string destination;
  double trips = 0.0;
};

enum class OutsideMode { kPerOdTable, kFreeTimeMultiplier };

struct OutsideOdEntry {
  std::string origin;
  std::string destination;
  std::optional<double> time;
  std::optional<double> ticket;
};

struct OutsideOption {
  OutsideMode mode = OutsideMode::kFreeTimeMultiplier;
  double multiplier = 3.0;
  double ticket = 500.0;
  // Per-OD overrides. Required times in kPerOdTable mode.
  std::vector<OutsideOdEntry> table;
};

struct InstanceDefaults {
  double car_length_km = 0.005;
  double bpr_gamma = 0.02;
  double bpr_nu = 2.0;
  TimeUnit time_unit = TimeUnit::kHours;
};

// A demand row with indices resolved and outside-option inputs
// materialized.
struct OdDemand {
  std::size_t stratum = 0;
  NodeIndex origin = 0;
  NodeIndex destination = 0;
  double trips = 0.0;
  double outside_time = 0.0;
  double outside_ticket = 0.0;
};

// All positive demand of one stratum towards one destination.
struct Commodity {
  std::size_t stratum = 0;
  NodeIndex destination = 0;
  std::vector<std::size_t> rows;  // into Instance::od_demand()
};

class Instance {
 public:
  // Validates and materializes derived fields. Arcs must already carry
  // capacity and free time (the loader fills them from defaults).
  static Instance Create(Network network, std::vector<Stratum> strata,
                         std::vector<DemandEntry> demand, OutsideOption outside,
                         InstanceDefaults defaults, SolverOptions solver);

  const Network& network() const { return network_; }
  const std::vector<Stratum>& strata() const { return strata_; }
  const std::vector<DemandEntry>& demand() const { return demand_; }
  const OutsideOption& outside() const { return outside_; }
  const InstanceDefaults& defaults() const { return defaults_; }
  const SolverOptions& solver() const { return solver_; }

  const std::vector<OdDemand>& od_demand() const { return od_demand_; }
  // Ordered by (stratum, destination index).
  const std::vector<Commodity>& commodities() const { return commodities_; }

  std::size_t stratum_index(const std::string& name) const;
  double ToHours(double time) const {
    return time / UnitsPerHour(defaults_.time_unit);
  }

  // Same instance with every demand row scaled by `factor` (>= 0); rows
  // scaled to zero are dropped.
  Instance WithDemandScaled(double factor) const;
  // Same instance with replaced strata (names must match).
  Instance WithStrata(std::vector<Stratum> strata) const;

 private:
  Network network_;
  std::vector<Stratum> strata_;
  std::vector<DemandEntry> demand_;
  OutsideOption outside_;
  InstanceDefaults defaults_;
  SolverOptions solver_;
  std::vector<OdDemand> od_demand_;
  std::vector<Commodity> commodities_;
};

// Outside-option generalized cost per od_demand() row:
// time + (outside_beta_price / outside_beta_time) * ticket.
std::vector<double> OutsideCosts(const Instance& instance);

struct InstanceLoadOptions {
  // Reduce the network with ExtractCore before validation; demand and
  // outside-table rows touching removed nodes are dropped.
  bool extract_core = false;
  // Receives one message per dropped item when set.
  std::vector<std::string>* warnings = nullptr;
};

// JSON instance document (see README for the schema).
Instance ParseInstance(std::string_view json_text,
                       const std::filesystem::path& base_dir = {},
                       const InstanceLoadOptions& options = {});
Instance LoadInstance(const std::filesystem::path& path,
                      const InstanceLoadOptions& options = {});
std::string SerializeInstance(const Instance& instance);
void SaveInstance(const Instance& instance, const std::filesystem::path& path);

// nodes.csv: id,x,y   arcs.csv: id,tail,head,length_km,free_speed_kmh,lanes,
// road_class[,capacity,bpr_gamma,bpr_nu]
Network LoadNetworkCsv(const std::filesystem::path& nodes_csv,
                       const std::filesystem::path& arcs_csv,
                       const InstanceDefaults& defaults);

// Partition of the node bounding box into rows x cols equal cells. Rows are
// numbered from the top (largest y), columns from the left; cells are
// half-open towards higher index except the last row/column, which is
// closed. The 2x2 grid is labelled N (top-left), E (top-right),
// S (bottom-right), W (bottom-left); other shapes use "r{i}c{j}".
class AreaAssignment {
 public:
  AreaAssignment() = default;
  AreaAssignment(int rows, int cols, std::vector<std::size_t> node_cell);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t num_nodes() const { return node_cell_.size(); }
  const std::string& label(NodeIndex node) const;
  // Cell labels in row-major order.
  const std::vector<std::string>& labels() const { return labels_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<std::size_t> node_cell_;
  std::vector<std::string> labels_;
};

AreaAssignment AssignAreas(const Network& network, int rows, int cols);

// Parses "RxC" (e.g. "2x2").
std::pair<int, int> ParseGridShape(const std::string& text);

}  // namespace mte

#endif  // MTE_INSTANCE_HPP_
