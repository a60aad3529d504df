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

#ifndef MTE_METRICS_HPP_
#define MTE_METRICS_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mte/equilibrium.hpp"
#include "mte/instance.hpp"
#include "mte/pricing.hpp"

namespace mte {

// Expected outcome of one demand row. Times are in the instance time unit.
struct TripStats {
  std::size_t stratum = 0;
  NodeIndex origin = 0;
  NodeIndex destination = 0;
  double trips = 0.0;
  double expected_time = 0.0;
  double expected_money = 0.0;
  double expected_distance_km = 0.0;
  double expected_primary_km = 0.0;
  double start_prob = 0.0;  // 1 - outside-option probability
};

// Expected accumulated time, money, distance and primary distance until
// absorption, per node, for one commodity of `solution`.
struct ChainExpectations {
  std::vector<double> time;
  std::vector<double> money;
  std::vector<double> distance_km;
  std::vector<double> primary_km;
};

ChainExpectations ExpectedChainStats(const Instance& instance, const ExpandedPrices& prices,
                                     const EquilibriumSolution& solution,
                                     std::size_t commodity);

// Rows for every origin with positive demand of (stratum, destination).
std::vector<TripStats> ExpectedTripStats(const Instance& instance,
                                         const ExpandedPrices& prices,
                                         const EquilibriumSolution& solution,
                                         std::size_t stratum, NodeIndex destination);

// One row per Instance::od_demand() entry, in that order.
std::vector<TripStats> AllTripStats(const Instance& instance, const ExpandedPrices& prices,
                                    const EquilibriumSolution& solution);

struct WelfareValue {
  double welfare = 0.0;  // literal per-stratum welfare at the priced solution
  double delta = 0.0;    // welfare minus its value at zero prices
};

// Welfare of `stratum`, averaged over its positive-demand OD pairs.
// `priced` and `baseline` are AllTripStats of the priced and the zero-price
// equilibria of the same instance.
WelfareValue Welfare(const Instance& instance, const std::vector<TripStats>& priced,
                     const std::vector<TripStats>& baseline, std::size_t stratum);

double TotalWelfare(const std::vector<double>& per_stratum);

// sum_a f^s_a * kappa_a(p^s_a).
double Revenue(const Instance& instance, const ExpandedPrices& prices,
               const EquilibriumSolution& solution, std::size_t stratum);
double TotalRevenue(const Instance& instance, const ExpandedPrices& prices,
                    const EquilibriumSolution& solution);

// Primary distance over total distance travelled by the stratum; empty
// when the stratum has no flow. `count_weighted` uses raw flow instead.
std::optional<double> PrimaryFlowShare(const Instance& instance,
                                       const EquilibriumSolution& solution,
                                       std::size_t stratum, bool count_weighted = false);

struct StratumMetrics {
  std::string name;
  double welfare = 0.0;
  double welfare_delta = 0.0;
  double revenue = 0.0;
  double trips = 0.0;
  double trips_started = 0.0;
  double started_share = 0.0;
  std::optional<double> primary_share;
  std::optional<double> primary_share_count;
  // Total distance over total driving time, km/h.
  std::optional<double> average_speed_kmh;
  // Started-trip-weighted mean of per-OD speeds, km/h.
  std::optional<double> trip_mean_speed_kmh;
  // Mean driving time of a started trip (instance time unit).
  std::optional<double> mean_trip_time;
};

struct MetricsReport {
  std::string provenance = "analytic";  // or "simulated"
  std::uint64_t seed = 0;
  int runs = 0;
  std::vector<StratumMetrics> strata;
  double total_welfare = 0.0;
  double total_welfare_delta = 0.0;
  double total_revenue = 0.0;
  double trips = 0.0;
  double trips_started = 0.0;
  double started_share = 0.0;
  std::optional<double> primary_share;
  std::optional<double> average_speed_kmh;
  std::vector<TripStats> od;
};

// Analytic metrics of `solution` relative to the zero-price `baseline`.
MetricsReport ComputeMetrics(const Instance& instance, const ExpandedPrices& prices,
                             const EquilibriumSolution& solution,
                             const EquilibriumSolution& baseline);

std::string MetricsToJson(const Instance& instance, const MetricsReport& report);
MetricsReport MetricsFromJson(const Instance& instance, const std::string& text);
// Flat CSV: one row per stratum followed by one row per (stratum, OD).
std::string MetricsToCsv(const Instance& instance, const MetricsReport& report,
                         const std::string& scheme_id);

struct SimulationOptions {
  int runs_per_unit = 10;
  std::uint64_t seed = 0;
  // 0 selects 50 * number of nodes.
  std::size_t step_cap = 0;
  bool keep_paths = false;
  int workers = 1;
};

struct SimulatedTrip {
  std::size_t row = 0;  // index into Instance::od_demand()
  std::uint32_t replicate = 0;
  double weight = 0.0;
  bool started = false;
  bool truncated = false;
  double time = 0.0;
  double money = 0.0;
  double distance_km = 0.0;
  double primary_km = 0.0;
  std::vector<ArcIndex> arcs;  // filled when keep_paths
};

// Monte Carlo estimate with its standard error.
struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

struct StratumSimulation {
  std::size_t samples = 0;
  std::size_t started = 0;
  std::size_t truncated = 0;
  Estimate started_share;
  Estimate mean_time;      // per completed started trip
  Estimate mean_money;
  Estimate primary_share;  // primary km / km over completed trips
  Estimate average_speed_kmh;
};

struct SimulationReport {
  SimulationOptions options;
  std::size_t step_cap = 0;
  std::vector<SimulatedTrip> trips;
  std::vector<StratumSimulation> strata;
  MetricsReport metrics;
};

// Samples trips from the equilibrium's start and transition
// probabilities. Every (row, replicate) draws from its own substream so
// results do not depend on the worker count.
SimulationReport SimulateTrips(const Instance& instance, const ExpandedPrices& prices,
                               const EquilibriumSolution& solution,
                               const SimulationOptions& options);

// Deterministic 64-bit substream seed for (seed, stratum, origin,
// destination, replicate).
std::uint64_t TripSeed(std::uint64_t seed, std::uint64_t stratum, std::uint64_t origin,
                       std::uint64_t destination, std::uint64_t replicate);

}  // namespace mte

#endif  // MTE_METRICS_HPP_
