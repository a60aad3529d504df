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

#include "mte/pricing.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

#include "mte/errors.hpp"

namespace mte {
namespace {

std::string FormatRate(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw Error("cannot format rate");
  return std::string(buf, end);
}

bool Admissible(const std::vector<double>& rates, SchemeFamily family, RateOrder order) {
  if (family != SchemeFamily::kPerStratum || order == RateOrder::kAny) return true;
  for (std::size_t k = 1; k < rates.size(); ++k) {
    if (order == RateOrder::kNondecreasing && rates[k] < rates[k - 1]) return false;
    if (order == RateOrder::kNonincreasing && rates[k] > rates[k - 1]) return false;
  }
  return true;
}

void CheckRates(const std::vector<double>& rates) {
  for (std::size_t k = 0; k < rates.size(); ++k) {
    if (!(rates[k] >= 0.0) || !std::isfinite(rates[k])) {
      throw ValidationError("rates[" + std::to_string(k) + "]",
                            "rates must be finite and nonnegative");
    }
  }
}

}  // namespace

const char* SchemeFamilyName(SchemeFamily family) {
  switch (family) {
    case SchemeFamily::kUniform: return "uniform";
    case SchemeFamily::kPerStratum: return "per_stratum";
    case SchemeFamily::kPerArea: return "per_area";
  }
  return "uniform";
}

SchemeFamily ParseSchemeFamily(const std::string& name) {
  if (name == "uniform") return SchemeFamily::kUniform;
  if (name == "stratum" || name == "per_stratum") return SchemeFamily::kPerStratum;
  if (name == "area" || name == "per_area") return SchemeFamily::kPerArea;
  throw ValidationError("scheme", "unknown scheme family \"" + name + "\"");
}

const char* RateOrderName(RateOrder order) {
  switch (order) {
    case RateOrder::kAny: return "any";
    case RateOrder::kNondecreasing: return "nondecreasing";
    case RateOrder::kNonincreasing: return "nonincreasing";
  }
  return "any";
}

RateOrder ParseRateOrder(const std::string& name) {
  if (name == "any") return RateOrder::kAny;
  if (name == "nondecreasing") return RateOrder::kNondecreasing;
  if (name == "nonincreasing") return RateOrder::kNonincreasing;
  throw ValidationError("order", "unknown rate order \"" + name + "\"");
}

std::string SchemeSpec::id() const {
  std::string out;
  switch (family) {
    case SchemeFamily::kUniform: out = "u"; break;
    case SchemeFamily::kPerStratum: out = "s"; break;
    case SchemeFamily::kPerArea: out = "a"; break;
  }
  for (double r : rates) out += "_" + FormatRate(r);
  return out;
}

bool operator==(const SchemeSpec& a, const SchemeSpec& b) {
  return a.family == b.family && a.rates == b.rates;
}

bool ExpandedPrices::all_zero() const {
  for (double r : rates_) {
    if (r != 0.0) return false;
  }
  return true;
}

bool operator==(const ExpandedPrices& a, const ExpandedPrices& b) {
  return a.num_strata() == b.num_strata() && a.num_arcs() == b.num_arcs() &&
         a.data() == b.data();
}

ExpandedPrices ZeroPrices(const Instance& instance) {
  return ExpandedPrices(instance.strata().size(), instance.network().num_arcs());
}

ExpandedPrices ExpandScheme(const SchemeSpec& spec, const Instance& instance,
                            const AreaAssignment* areas) {
  CheckRates(spec.rates);
  const Network& net = instance.network();
  const std::size_t num_strata = instance.strata().size();
  ExpandedPrices prices(num_strata, net.num_arcs());
  switch (spec.family) {
    case SchemeFamily::kUniform: {
      if (spec.rates.size() != 1) {
        throw ValidationError("rates", "uniform pricing takes exactly one rate");
      }
      for (std::size_t s = 0; s < num_strata; ++s) {
        for (ArcIndex a = 0; a < net.num_arcs(); ++a) {
          prices.set_rate(s, a, spec.rates[0]);
        }
      }
      break;
    }
    case SchemeFamily::kPerStratum: {
      if (spec.rates.size() != num_strata) {
        throw ValidationError("rates", "per-stratum pricing needs " +
                                           std::to_string(num_strata) + " rates, got " +
                                           std::to_string(spec.rates.size()));
      }
      for (std::size_t s = 0; s < num_strata; ++s) {
        for (ArcIndex a = 0; a < net.num_arcs(); ++a) {
          prices.set_rate(s, a, spec.rates[s]);
        }
      }
      break;
    }
    case SchemeFamily::kPerArea: {
      if (areas == nullptr) {
        throw ValidationError("areas", "per-area pricing needs an area assignment");
      }
      if (areas->num_nodes() != net.num_nodes()) {
        throw ValidationError("areas", "area assignment does not match the network");
      }
      if (spec.rates.size() != areas->labels().size()) {
        throw ValidationError("rates", "per-area pricing needs " +
                                           std::to_string(areas->labels().size()) +
                                           " rates, got " +
                                           std::to_string(spec.rates.size()));
      }
      for (ArcIndex a = 0; a < net.num_arcs(); ++a) {
        const std::string& label = AreaOfArc(net, a, *areas);
        std::size_t k = 0;
        while (areas->labels()[k] != label) ++k;
        for (std::size_t s = 0; s < num_strata; ++s) prices.set_rate(s, a, spec.rates[k]);
      }
      break;
    }
  }
  return prices;
}

SchemeSpec PerStratumScheme(const Instance& instance,
                            const std::map<std::string, double>& rates) {
  SchemeSpec spec{SchemeFamily::kPerStratum, {}};
  for (const Stratum& s : instance.strata()) {
    auto it = rates.find(s.name);
    if (it == rates.end()) {
      throw ValidationError("rates." + s.name, "missing rate for stratum");
    }
    spec.rates.push_back(it->second);
  }
  for (const auto& [name, rate] : rates) {
    (void)rate;
    instance.stratum_index(name);
  }
  return spec;
}

SchemeSpec PerAreaScheme(const AreaAssignment& areas,
                         const std::map<std::string, double>& rates) {
  SchemeSpec spec{SchemeFamily::kPerArea, {}};
  for (const std::string& label : areas.labels()) {
    auto it = rates.find(label);
    if (it == rates.end()) throw ValidationError("rates." + label, "missing area rate");
    spec.rates.push_back(it->second);
  }
  if (rates.size() != areas.labels().size()) {
    throw ValidationError("rates", "unknown area label in rates");
  }
  return spec;
}

std::vector<double> GridValues(const GridSpec& grid) {
  if (!grid.values.empty()) {
    CheckRates(grid.values);
    return grid.values;
  }
  if (!std::isfinite(grid.lo) || !std::isfinite(grid.hi) || !(grid.step > 0.0)) {
    throw ValidationError("grid", "need finite bounds and step > 0");
  }
  if (grid.lo > grid.hi) throw ValidationError("grid", "empty grid: lo > hi");
  if (grid.lo < 0.0) throw ValidationError("grid", "rates must be nonnegative");
  const auto n = static_cast<std::size_t>(
      std::floor((grid.hi - grid.lo) / grid.step + 1e-9)) + 1;
  std::vector<double> values(n);
  for (std::size_t k = 0; k < n; ++k) values[k] = grid.lo + static_cast<double>(k) * grid.step;
  return values;
}

std::vector<SchemeSpec> EnumerateGrid(const GridSpec& grid) {
  const std::vector<double> values = GridValues(grid);
  const std::size_t dim = grid.family == SchemeFamily::kUniform ? 1 : grid.dimension;
  if (dim == 0) throw ValidationError("grid.dimension", "must be >= 1");
  std::vector<SchemeSpec> out;
  std::vector<std::size_t> idx(dim, 0);
  std::vector<double> rates(dim);
  while (true) {
    for (std::size_t k = 0; k < dim; ++k) rates[k] = values[idx[k]];
    if (Admissible(rates, grid.family, grid.order)) out.push_back({grid.family, rates});
    std::size_t k = dim;
    while (k > 0) {
      --k;
      if (++idx[k] < values.size()) break;
      idx[k] = 0;
      if (k == 0) return out;
    }
  }
}

std::size_t GridCount(const GridSpec& grid) {
  const std::size_t n = GridValues(grid).size();
  const std::size_t dim = grid.family == SchemeFamily::kUniform ? 1 : grid.dimension;
  if (grid.family == SchemeFamily::kPerStratum && grid.order != RateOrder::kAny) {
    // Multisets of size dim from n values: C(n + dim - 1, dim).
    std::size_t c = 1;
    for (std::size_t k = 1; k <= dim; ++k) c = c * (n + k - 1) / k;
    return c;
  }
  std::size_t c = 1;
  for (std::size_t k = 0; k < dim; ++k) c *= n;
  return c;
}

GridSpec ParseGridRange(const std::string& text) {
  GridSpec grid;
  const auto a = text.find(':');
  const auto b = a == std::string::npos ? a : text.find(':', a + 1);
  if (b == std::string::npos) {
    throw ValidationError("grid", "expected LO:HI:STEP, got \"" + text + "\"");
  }
  try {
    grid.lo = std::stod(text.substr(0, a));
    grid.hi = std::stod(text.substr(a + 1, b - a - 1));
    grid.step = std::stod(text.substr(b + 1));
  } catch (const std::exception&) {
    throw ValidationError("grid", "expected LO:HI:STEP, got \"" + text + "\"");
  }
  GridValues(grid);
  return grid;
}

const std::string& AreaOfArc(const Network& network, ArcIndex arc,
                             const AreaAssignment& areas) {
  return areas.label(network.tail(arc));
}

}  // namespace mte
