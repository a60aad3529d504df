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

#ifndef MTE_PRICING_HPP_
#define MTE_PRICING_HPP_

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "mte/instance.hpp"
#include "mte/network.hpp"

namespace mte {

enum class SchemeFamily { kUniform, kPerStratum, kPerArea };

const char* SchemeFamilyName(SchemeFamily family);
// Accepts "uniform", "stratum"/"per_stratum", "area"/"per_area".
SchemeFamily ParseSchemeFamily(const std::string& name);

// One pricing scheme. `rates` holds one value for kUniform, one per
// stratum (instance order) for kPerStratum and one per area label
// (AreaAssignment::labels() order) for kPerArea.
struct SchemeSpec {
  SchemeFamily family = SchemeFamily::kUniform;
  std::vector<double> rates;

  // Stable identifier derived from the rates, e.g. "u_600",
  // "s_1000_600_400", "a_800_400_600_1000".
  std::string id() const;
};

bool operator==(const SchemeSpec& a, const SchemeSpec& b);

// Per-stratum, per-arc toll rates in money per km.
class ExpandedPrices {
 public:
  ExpandedPrices() = default;
  ExpandedPrices(std::size_t num_strata, std::size_t num_arcs, double rate = 0.0)
      : num_strata_(num_strata), num_arcs_(num_arcs),
        rates_(num_strata * num_arcs, rate) {}

  std::size_t num_strata() const { return num_strata_; }
  std::size_t num_arcs() const { return num_arcs_; }
  double rate(std::size_t stratum, ArcIndex arc) const {
    return rates_[stratum * num_arcs_ + arc];
  }
  void set_rate(std::size_t stratum, ArcIndex arc, double rate) {
    rates_[stratum * num_arcs_ + arc] = rate;
  }
  const std::vector<double>& data() const { return rates_; }
  bool all_zero() const;

 private:
  std::size_t num_strata_ = 0;
  std::size_t num_arcs_ = 0;
  std::vector<double> rates_;
};

bool operator==(const ExpandedPrices& a, const ExpandedPrices& b);

// Zero rates for every stratum and arc of `instance`.
ExpandedPrices ZeroPrices(const Instance& instance);

// `areas` is required for kPerArea only.
ExpandedPrices ExpandScheme(const SchemeSpec& spec, const Instance& instance,
                            const AreaAssignment* areas = nullptr);

// Builds rate vectors from name-keyed maps; every stratum / area must
// be present.
SchemeSpec PerStratumScheme(const Instance& instance,
                            const std::map<std::string, double>& rates);
SchemeSpec PerAreaScheme(const AreaAssignment& areas,
                         const std::map<std::string, double>& rates);

enum class RateOrder { kAny, kNondecreasing, kNonincreasing };

const char* RateOrderName(RateOrder order);
RateOrder ParseRateOrder(const std::string& name);

struct GridSpec {
  SchemeFamily family = SchemeFamily::kUniform;
  double lo = 0.0;
  double hi = 0.0;
  double step = 1.0;
  // Number of rate components: 1 for uniform, strata for per-stratum,
  // areas for per-area.
  std::size_t dimension = 1;
  // Per-stratum only: monotonicity filter over the rate vector in
  // instance stratum order. With strata listed from high to low income,
  // kNonincreasing keeps p_low <= p_mid <= p_high.
  RateOrder order = RateOrder::kNonincreasing;
  // Optional explicit value list replacing lo/hi/step (e.g. {0, 1600}).
  std::vector<double> values;
};

// Grid values lo, lo+step, ..., up to hi (inclusive within 1e-9 step).
std::vector<double> GridValues(const GridSpec& grid);

// Lexicographic enumeration of all rate vectors over the grid values.
std::vector<SchemeSpec> EnumerateGrid(const GridSpec& grid);

// Closed-form count of EnumerateGrid(grid).size().
std::size_t GridCount(const GridSpec& grid);

// Parses "LO:HI:STEP".
GridSpec ParseGridRange(const std::string& text);

// Area of an arc is the area of its tail node.
const std::string& AreaOfArc(const Network& network, ArcIndex arc,
                             const AreaAssignment& areas);

}  // namespace mte

#endif  // MTE_PRICING_HPP_
