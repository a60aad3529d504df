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

#ifndef MTE_SYNTHGEN_HPP_
#define MTE_SYNTHGEN_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "mte/instance.hpp"

namespace mte {

// high / mid / low income strata: beta_t = 1, beta_p = (0.5, 0.7, 1.0),
// outside beta_t = (1.2, 1.1, 1.0), outside beta_p = 1.
std::vector<Stratum> DefaultStrata();

// Four-node network with one OD pair (0 -> 3), 500 trips per stratum.
Instance GenSingleOd();

struct GridGenSpec {
  int rows = 10;
  int cols = 10;
  double spacing_km = 0.6;
  double primary_length_km = 1.2;
  double primary_speed_kmh = 80.0;
  int primary_lanes = 3;
  double secondary_length_km = 0.6;
  double secondary_speed_kmh = 30.0;
  int secondary_lanes = 1;
  double min_distance_km = 5.0;
  int pairs_per_group = 10;
  double trips = 10.0;
  std::uint64_t seed = 0;
  double ticket = 400.0;
  double outside_multiplier = 3.0;
  TimeUnit time_unit = TimeUnit::kSeconds;
};

// Lattice line k of n is a two-way secondary street when k % 3 == 0 or
// k == n - 1, otherwise a one-way primary road.
bool IsSecondaryLine(int k, int n);

// rows x cols lattice. Primary lines alternate direction by their ordinal
// among primary lines: even rows run east and even columns run north, odd
// ones the opposite way. OD pairs are sampled per (origin area,
// destination area) group of the 2x2 partition among pairs whose shortest
// distance is at least min_distance_km. Groups without candidates are
// skipped and reported in `warnings`.
Instance GenGrid(const GridGenSpec& spec, std::vector<std::string>* warnings = nullptr);

GridGenSpec ParseGridGenSpec(const std::string& json_text);
std::string GridGenSpecToJson(const GridGenSpec& spec);

}  // namespace mte

#endif  // MTE_SYNTHGEN_HPP_
