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
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "mte/errors.hpp"
#include "mte/pricing.hpp"
#include "mte/synthgen.hpp"
#include "test_support.hpp"

namespace mte {
namespace {

using testing::Gen;

GridSpec Grid(SchemeFamily family, double lo, double hi, double step, std::size_t dim,
              RateOrder order = RateOrder::kNonincreasing) {
  GridSpec g;
  g.family = family;
  g.lo = lo;
  g.hi = hi;
  g.step = step;
  g.dimension = dim;
  g.order = order;
  return g;
}

// Counts by brute-force nested enumeration.
std::size_t BruteCount(std::size_t values, std::size_t dim, RateOrder order) {
  std::size_t count = 0;
  std::vector<std::size_t> idx(dim, 0);
  while (true) {
    bool ok = true;
    for (std::size_t k = 1; k < dim; ++k) {
      if (order == RateOrder::kNondecreasing && idx[k] < idx[k - 1]) ok = false;
      if (order == RateOrder::kNonincreasing && idx[k] > idx[k - 1]) ok = false;
    }
    count += ok;
    std::size_t k = 0;
    while (k < dim && ++idx[k] == values) idx[k++] = 0;
    if (k == dim) break;
  }
  return count;
}

TEST(GridValues, InclusiveRange) {
  const auto v = GridValues(Grid(SchemeFamily::kUniform, 0, 1600, 100, 1));
  ASSERT_EQ(v.size(), 17u);
  EXPECT_EQ(v.front(), 0.0);
  EXPECT_EQ(v.back(), 1600.0);
  EXPECT_EQ(v[7], 700.0);
}

TEST(GridValues, ExplicitListWins) {
  GridSpec g = Grid(SchemeFamily::kUniform, 0, 1600, 100, 1);
  g.values = {0, 1600};
  EXPECT_EQ(GridValues(g), (std::vector<double>{0, 1600}));
}

TEST(EnumerateGrid, ReferenceCounts) {
  EXPECT_EQ(EnumerateGrid(Grid(SchemeFamily::kUniform, 0, 1600, 100, 1)).size(), 17u);
  EXPECT_EQ(EnumerateGrid(Grid(SchemeFamily::kPerArea, 0, 1600, 200, 4)).size(), 6561u);
  EXPECT_EQ(EnumerateGrid(Grid(SchemeFamily::kPerStratum, 0, 1600, 200, 3)).size(), 165u);
  EXPECT_EQ(GridCount(Grid(SchemeFamily::kPerArea, 0, 1600, 200, 4)), 6561u);
  EXPECT_EQ(GridCount(Grid(SchemeFamily::kPerStratum, 0, 1600, 200, 3)), 165u);
  EXPECT_EQ(
      GridCount(Grid(SchemeFamily::kPerStratum, 0, 1600, 200, 3, RateOrder::kAny)), 729u);
}

TEST(EnumerateGrid, CountsMatchBruteForce) {
  Gen gen(71);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t values = static_cast<std::size_t>(gen.Int(1, 6));
    const std::size_t dim = static_cast<std::size_t>(gen.Int(1, 4));
    const RateOrder order =
        std::vector<RateOrder>{RateOrder::kAny, RateOrder::kNondecreasing,
                               RateOrder::kNonincreasing}[gen.Int(0, 2)];
    const GridSpec g = Grid(SchemeFamily::kPerStratum, 0, 10.0 * (values - 1), 10, dim, order);
    const auto schemes = EnumerateGrid(g);
    EXPECT_EQ(schemes.size(), BruteCount(values, dim, order));
    EXPECT_EQ(GridCount(g), schemes.size());
    std::set<std::string> ids;
    for (const auto& s : schemes) {
      ASSERT_EQ(s.rates.size(), dim);
      for (std::size_t k = 1; k < dim; ++k) {
        if (order == RateOrder::kNondecreasing) {
          EXPECT_LE(s.rates[k - 1], s.rates[k]);
        } else if (order == RateOrder::kNonincreasing) {
          EXPECT_GE(s.rates[k - 1], s.rates[k]);
        }
      }
      ids.insert(s.id());
    }
    EXPECT_EQ(ids.size(), schemes.size());
    EXPECT_TRUE(std::is_sorted(schemes.begin(), schemes.end(),
                               [](const SchemeSpec& a, const SchemeSpec& b) {
                                 return a.rates < b.rates;
                               }));
  }
}

TEST(EnumerateGrid, RejectsBadRanges) {
  EXPECT_THROW(EnumerateGrid(Grid(SchemeFamily::kUniform, 10, 0, 1, 1)), ValidationError);
  EXPECT_THROW(EnumerateGrid(Grid(SchemeFamily::kUniform, 0, 10, 0, 1)), ValidationError);
}

TEST(ParseGridRange, Text) {
  const GridSpec g = ParseGridRange("0:1600:100");
  EXPECT_EQ(g.lo, 0.0);
  EXPECT_EQ(g.hi, 1600.0);
  EXPECT_EQ(g.step, 100.0);
  EXPECT_THROW(ParseGridRange("0:1600"), ValidationError);
  EXPECT_THROW(ParseGridRange("a:b:c"), ValidationError);
}

TEST(SchemeSpec, Ids) {
  EXPECT_EQ((SchemeSpec{SchemeFamily::kUniform, {600}}).id(), "u_600");
  EXPECT_EQ((SchemeSpec{SchemeFamily::kPerStratum, {1000, 600, 400}}).id(), "s_1000_600_400");
  EXPECT_EQ((SchemeSpec{SchemeFamily::kPerArea, {800, 400, 600, 1000}}).id(),
            "a_800_400_600_1000");
  EXPECT_EQ(ParseSchemeFamily(SchemeFamilyName(SchemeFamily::kPerArea)),
            SchemeFamily::kPerArea);
  EXPECT_THROW(ParseSchemeFamily("cordon"), ValidationError);
}

TEST(ExpandScheme, UniformRatesEveryArcAndStratum) {
  const Instance inst = GenSingleOd();
  const auto p = ExpandScheme({SchemeFamily::kUniform, {600}}, inst);
  for (std::size_t s = 0; s < 3; ++s) {
    for (ArcIndex a = 0; a < inst.network().num_arcs(); ++a) EXPECT_EQ(p.rate(s, a), 600.0);
  }
  EXPECT_FALSE(p.all_zero());
  EXPECT_TRUE(ZeroPrices(inst).all_zero());
}

TEST(ExpandScheme, PerStratum) {
  const Instance inst = GenSingleOd();
  const auto spec = PerStratumScheme(inst, {{"high", 1000}, {"mid", 600}, {"low", 400}});
  EXPECT_EQ(spec.rates, (std::vector<double>{1000, 600, 400}));
  const auto p = ExpandScheme(spec, inst);
  EXPECT_EQ(p.rate(0, 2), 1000.0);
  EXPECT_EQ(p.rate(1, 2), 600.0);
  EXPECT_EQ(p.rate(2, 2), 400.0);
  EXPECT_THROW(PerStratumScheme(inst, {{"high", 1}, {"mid", 1}}), ValidationError);
  EXPECT_THROW(PerStratumScheme(inst, {{"high", 1}, {"mid", 1}, {"rich", 1}}), ValidationError);
  EXPECT_THROW(ExpandScheme({SchemeFamily::kPerStratum, {1, 2}}, inst), ValidationError);
}

TEST(ExpandScheme, PerAreaUsesTailArea) {
  GridGenSpec spec;
  spec.rows = 4;
  spec.cols = 4;
  spec.min_distance_km = 0;
  spec.pairs_per_group = 1;
  const Instance inst = GenGrid(spec);
  const AreaAssignment areas = AssignAreas(inst.network(), 2, 2);
  const auto scheme = PerAreaScheme(areas, {{"N", 800}, {"W", 600}, {"E", 400}, {"S", 1000}});
  const auto p = ExpandScheme(scheme, inst, &areas);
  const std::map<std::string, double> want = {{"N", 800}, {"W", 600}, {"E", 400}, {"S", 1000}};
  bool crossing = false;
  for (ArcIndex a = 0; a < inst.network().num_arcs(); ++a) {
    const auto& tail_area = areas.label(inst.network().tail(a));
    EXPECT_EQ(AreaOfArc(inst.network(), a, areas), tail_area);
    for (std::size_t s = 0; s < inst.strata().size(); ++s) {
      EXPECT_EQ(p.rate(s, a), want.at(tail_area));
    }
    crossing |= tail_area != areas.label(inst.network().head(a));
  }
  EXPECT_TRUE(crossing);
  EXPECT_THROW(ExpandScheme(scheme, inst), ValidationError);
  EXPECT_THROW(PerAreaScheme(areas, {{"N", 1}}), ValidationError);
}

TEST(ExpandScheme, OneByOneAreaIsUniform) {
  const Instance inst = GenSingleOd();
  const AreaAssignment one = AssignAreas(inst.network(), 1, 1);
  ASSERT_EQ(one.labels().size(), 1u);
  EXPECT_EQ(ExpandScheme({SchemeFamily::kPerArea, {300}}, inst, &one),
            ExpandScheme({SchemeFamily::kUniform, {300}}, inst));
}

TEST(ExpandScheme, AllFamiliesAgreeOnConstantRates) {
  Gen gen(72);
  GridGenSpec spec;
  spec.rows = 4;
  spec.cols = 5;
  spec.min_distance_km = 0;
  spec.pairs_per_group = 1;
  const Instance inst = GenGrid(spec);
  const AreaAssignment areas = AssignAreas(inst.network(), 2, 2);
  for (int trial = 0; trial < 50; ++trial) {
    const double p = gen.Uniform(0, 2000);
    const auto u = ExpandScheme({SchemeFamily::kUniform, {p}}, inst);
    const auto s = ExpandScheme(
        {SchemeFamily::kPerStratum, std::vector<double>(inst.strata().size(), p)}, inst);
    const auto a = ExpandScheme({SchemeFamily::kPerArea, std::vector<double>(4, p)}, inst, &areas);
    EXPECT_EQ(u, s);
    EXPECT_EQ(u, a);
  }
}

}  // namespace
}  // namespace mte
