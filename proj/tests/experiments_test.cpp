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
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "mte/errors.hpp"
#include "mte/experiments.hpp"
#include "mte/solution_io.hpp"
#include "mte/synthgen.hpp"
#include "test_support.hpp"

namespace mte {
namespace {

using testing::Gen;

// A table with one stratum "s"; each row carries (W^s, W, R).
struct Point {
  std::string id;
  std::vector<double> rates;
  double ws, w, r;
};

ResultsTable Table(const std::vector<Point>& points) {
  ResultsTable t;
  t.strata = {"s"};
  for (const Point& p : points) {
    ResultRow row;
    row.scheme_id = p.id;
    row.rates = p.rates;
    StratumResult s;
    s.name = "s";
    s.welfare = p.ws;
    row.strata.push_back(s);
    row.total_welfare = p.w;
    row.total_revenue = p.r;
    row.converged = row.inner_converged = true;
    t.rows.push_back(row);
  }
  return t;
}

std::set<std::string> Ids(const std::vector<ResultRow>& rows) {
  std::set<std::string> ids;
  for (const auto& r : rows) ids.insert(r.scheme_id);
  return ids;
}

TEST(ParetoFrontier, Examples) {
  auto f = ParetoFrontier(Table({{"a", {1}, 0, 1, 1}, {"b", {2}, 0, 2, 2}}), "total_welfare",
                          "total_revenue");
  EXPECT_EQ(Ids(f), (std::set<std::string>{"b"}));
  f = ParetoFrontier(
      Table({{"a", {1}, 0, 1, 3}, {"b", {2}, 0, 3, 1}, {"c", {3}, 0, 2, 2}}), "total_welfare",
      "total_revenue");
  EXPECT_EQ(Ids(f), (std::set<std::string>{"a", "b", "c"}));
  // Sorted by x ascending.
  EXPECT_EQ(f[0].scheme_id, "a");
  EXPECT_EQ(f[2].scheme_id, "b");
}

TEST(ParetoFrontier, DuplicatesKeptOnce) {
  auto f = ParetoFrontier(Table({{"a", {5}, 0, 2, 2}, {"a", {5}, 0, 2, 2}, {"b", {3}, 0, 2, 2},
                                 {"c", {1}, 0, 1, 1}}),
                          "total_welfare", "total_revenue");
  ASSERT_EQ(f.size(), 1u);
  EXPECT_EQ(f[0].scheme_id, "b");
}

TEST(ParetoFrontier, MatchesBruteForce) {
  Gen gen(101);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<Point> pts;
    const int n = gen.Int(1, 25);
    for (int k = 0; k < n; ++k) {
      // Small integer coordinates force ties.
      pts.push_back({"p" + std::to_string(k), {static_cast<double>(gen.Int(0, 50)), double(k)},
                     static_cast<double>(gen.Int(0, 6)), static_cast<double>(gen.Int(0, 6)),
                     static_cast<double>(gen.Int(0, 6))});
    }
    const ResultsTable t = Table(pts);
    const auto f = ParetoFrontier(t, "welfare:s", "total_revenue");
    std::set<std::string> want;
    for (const Point& p : pts) {
      bool dominated = false, shadowed = false;
      for (const Point& q : pts) {
        dominated |= q.ws >= p.ws && q.r >= p.r && (q.ws > p.ws || q.r > p.r);
        shadowed |= q.ws == p.ws && q.r == p.r && q.rates < p.rates;
      }
      if (!dominated && !shadowed) want.insert(p.id);
    }
    EXPECT_EQ(Ids(f), want) << trial;
    for (std::size_t k = 1; k < f.size(); ++k) {
      EXPECT_LT(f[k - 1].strata[0].welfare, f[k].strata[0].welfare);
    }
  }
}

TEST(BestScalarized, Examples) {
  const ResultsTable t = Table({{"a", {2}, 0, 10, 1}, {"b", {1}, 4, 4, 9}, {"c", {3}, 10, 0, 5}});
  ScalarizedObjective obj{"s", 0.5, ScalarizedMode::kWelfareVsTotalWelfare};
  // a and c both score 5; a has the smaller rate vector.
  EXPECT_EQ(BestScalarized(t, obj).scheme_id, "a");
  obj.lambda = 1;
  EXPECT_EQ(BestScalarized(t, obj).scheme_id, "c");
  obj.lambda = 0;
  obj.mode = ScalarizedMode::kWelfareVsRevenue;
  EXPECT_EQ(BestScalarized(t, obj).scheme_id, "b");
  obj.lambda = 1.5;
  EXPECT_THROW(BestScalarized(t, obj), ValidationError);
  obj.lambda = 0.5;
  EXPECT_THROW(BestScalarized(Table({}), obj), ValidationError);
  EXPECT_EQ(ParseScalarizedMode(ScalarizedModeName(ScalarizedMode::kWelfareVsRevenue)),
            ScalarizedMode::kWelfareVsRevenue);
}

TEST(BestScalarized, LiesOnTheFrontier) {
  Gen gen(102);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Point> pts;
    const int n = gen.Int(1, 15);
    for (int k = 0; k < n; ++k) {
      pts.push_back({"p" + std::to_string(k), {static_cast<double>(gen.Int(0, 9)), double(k)},
                     static_cast<double>(gen.Int(-3, 3)), static_cast<double>(gen.Int(-3, 3)),
                     static_cast<double>(gen.Int(0, 3))});
    }
    const ResultsTable t = Table(pts);
    ScalarizedObjective obj;
    obj.stratum = "s";
    obj.lambda = std::vector<double>{0, 0.25, 0.5, 1}[gen.Int(0, 3)];
    obj.mode = gen.Coin() ? ScalarizedMode::kWelfareVsRevenue
                          : ScalarizedMode::kWelfareVsTotalWelfare;
    const auto [x, y] = ScalarizedAxes(obj);
    const ResultRow best = BestScalarized(t, obj);
    EXPECT_EQ(Ids(ParetoFrontier(t, x, y)).count(best.scheme_id), 1u) << trial;
  }
}

TEST(ObjectiveValue, Names) {
  const ResultsTable t = Table({{"a", {1}, 3, 4, 5}});
  EXPECT_EQ(*ObjectiveValue(t, t.rows[0], "welfare:s"), 3.0);
  EXPECT_EQ(*ObjectiveValue(t, t.rows[0], "total_welfare"), 4.0);
  EXPECT_EQ(*ObjectiveValue(t, t.rows[0], "total_revenue"), 5.0);
  EXPECT_FALSE(ObjectiveValue(t, t.rows[0], "primary_share").has_value());
  EXPECT_THROW(ObjectiveValue(t, t.rows[0], "welfare:nobody"), ValidationError);
  EXPECT_THROW(ObjectiveValue(t, t.rows[0], "happiness"), ValidationError);
  EXPECT_EQ(FrontierFileName("total_welfare", "welfare:low"),
            "frontier_total_welfare_welfare-low.csv");
}

TEST(Persistence, RoundTrip) {
  Gen gen(103);
  ResultsTable t;
  t.strata = {"high", "low"};
  for (int k = 0; k < 17; ++k) {
    ResultRow r;
    r.scheme_id = "u_" + std::to_string(100 * k);
    r.rates = {100.0 * k};
    r.baseline = k == 0;
    for (const auto& name : t.strata) {
      StratumResult s;
      s.name = name;
      s.welfare = gen.Uniform(-1e3, 1e3) / 3;
      s.welfare_delta = gen.Uniform(-1, 1) * 1e-7;
      s.revenue = gen.Uniform(0, 1e6) / 7;
      s.trips_started = gen.Uniform(0, 500);
      s.started_share = gen.Uniform(0, 1);
      if (gen.Coin()) s.primary_share = gen.Uniform(0, 1);
      if (gen.Coin()) s.average_speed_kmh = gen.Uniform(10, 80);
      if (gen.Coin()) s.sim_mean_time = gen.Uniform(10, 80);
      r.strata.push_back(s);
    }
    r.total_welfare = gen.Uniform(-1, 1) / 3;
    r.total_revenue = gen.Uniform(0, 1) / 3;
    r.converged = gen.Coin();
    r.inner_converged = true;
    r.outer_iterations = gen.Int(1, 100);
    r.outer_residual = gen.Uniform(0, 1e-5);
    if (k == 5) r.error = "solver blew up, \"badly\"";
    t.rows.push_back(r);
  }
  const auto dir = testing::TempDir("persist");
  PersistResults(t, dir, {{"total_welfare", "total_revenue"}});
  EXPECT_TRUE(std::filesystem::exists(dir / "results.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "frontier_total_welfare_total_revenue.csv"));
  std::vector<std::string> warnings;
  const ResultsTable back = LoadResults(dir, &warnings);
  EXPECT_EQ(back.strata, t.strata);
  ASSERT_EQ(back.rows.size(), t.rows.size());
  for (std::size_t k = 0; k < t.rows.size(); ++k) EXPECT_TRUE(back.rows[k] == t.rows[k]) << k;
  EXPECT_EQ(ResultsToCsv(back), ResultsToCsv(t));
  EXPECT_TRUE(ResultRowFromJson(ResultRowToJson(t.rows[5])) == t.rows[5]);
}

TEST(Persistence, EmptyDirectoryWarns) {
  const auto dir = testing::TempDir("persist_empty");
  std::vector<std::string> warnings;
  const ResultsTable t = LoadResults(dir, &warnings);
  EXPECT_TRUE(t.rows.empty());
  EXPECT_EQ(warnings.size(), 1u);
}

TEST(Persistence, VersionMismatchIsAnError) {
  const auto dir = testing::TempDir("persist_version");
  PersistResults(Table({{"a", {1}, 0, 1, 1}}), dir);
  std::string text = ReadTextFile(dir / "manifest.json");
  const std::string key = "\"schema_version\": 1";
  const auto pos = text.find(key);
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, key.size(), "\"schema_version\": 2");
  WriteTextFileAtomic(dir / "manifest.json", text);
  EXPECT_THROW(LoadResults(dir), SchemaVersionError);
}

SweepConfig QuickSweep(const std::filesystem::path& out, double hi) {
  SweepConfig c;
  c.grid = ParseGridRange("0:" + std::to_string(static_cast<int>(hi)) + ":100");
  SolverOptions o;
  o.inner_tol = 1e-8;
  o.outer_tol = 1e-6;
  o.outer_max_iters = 5000;
  o.step_rule = StepRule::kAdaptive;
  c.solver = o;
  c.output = out;
  return c;
}

TEST(RunSweep, BaselineRowAndCounts) {
  const Instance inst = GenSingleOd();
  const SweepResult r = RunSweep(QuickSweep({}, 1600), inst);
  ASSERT_EQ(r.table.rows.size(), 18u);
  EXPECT_EQ(r.computed, 17u);
  const ResultRow& base = r.table.rows[0];
  EXPECT_TRUE(base.baseline);
  EXPECT_EQ(base.total_revenue, 0.0);
  for (const auto& s : base.strata) EXPECT_EQ(s.welfare_delta, 0.0);
  // u_0 solves the same problem as the baseline.
  EXPECT_EQ(r.table.rows[1].scheme_id, "u_0");
  EXPECT_EQ(r.table.rows[1].total_welfare_delta, 0.0);
  for (const auto& row : r.table.rows) {
    EXPECT_TRUE(row.converged) << row.scheme_id;
    EXPECT_TRUE(row.error.empty()) << row.scheme_id;
  }
}

TEST(RunSweep, ResumesWhereItStopped) {
  const Instance inst = GenSingleOd();
  const auto dir = testing::TempDir("resume");
  const SweepResult first = RunSweep(QuickSweep(dir, 800), inst);
  EXPECT_EQ(first.computed, 9u);
  const std::string kept = ReadTextFile(dir / "schemes" / "u_400.json");
  const auto stamp = std::filesystem::last_write_time(dir / "schemes" / "u_400.json");
  const SweepResult second = RunSweep(QuickSweep(dir, 1600), inst);
  EXPECT_EQ(second.computed, 8u);
  EXPECT_EQ(second.reused, 9u);
  EXPECT_EQ(ReadTextFile(dir / "schemes" / "u_400.json"), kept);
  EXPECT_EQ(std::filesystem::last_write_time(dir / "schemes" / "u_400.json"), stamp);
  const SweepResult fresh = RunSweep(QuickSweep({}, 1600), inst);
  ASSERT_EQ(second.table.rows.size(), fresh.table.rows.size());
  for (std::size_t k = 0; k < fresh.table.rows.size(); ++k) {
    EXPECT_TRUE(second.table.rows[k] == fresh.table.rows[k]) << k;
  }
  EXPECT_EQ(ResultsToCsv(LoadResults(dir)), ResultsToCsv(fresh.table));
}

TEST(RunSweep, RefusesForeignOutputDirectory) {
  const Instance inst = GenSingleOd();
  const auto dir = testing::TempDir("foreign");
  RunSweep(QuickSweep(dir, 100), inst);
  SweepConfig other = QuickSweep(dir, 100);
  other.solver->outer_tol = 1e-3;
  EXPECT_THROW(RunSweep(other, inst), Error);
}

TEST(RunSweep, WorkerCountDoesNotChangeResults) {
  const Instance inst = GenSingleOd();
  const auto one = testing::TempDir("workers1");
  const auto three = testing::TempDir("workers3");
  SweepConfig c = QuickSweep(one, 700);
  RunSweep(c, inst);
  c.output = three;
  c.workers = 3;
  RunSweep(c, inst);
  EXPECT_EQ(ReadTextFile(one / "results.csv"), ReadTextFile(three / "results.csv"));
}

TEST(ParseSweepConfig, Fields) {
  const SweepConfig c = ParseSweepConfig(R"({
    "schema_version": 1, "instance": "inst.json",
    "scheme": {"family": "per_stratum", "grid": "0:1600:200", "order": "any"},
    "solver": {"outer_tol": 1e-6, "step_rule": "adaptive"},
    "metrics": {"simulate": true, "runs": 3, "seed": 9},
    "workers": 2, "output": "out",
    "frontiers": [["total_welfare", "welfare:low"]]})",
                                         "/base");
  EXPECT_EQ(c.instance_path, std::filesystem::path("/base/inst.json"));
  EXPECT_EQ(c.output, std::filesystem::path("/base/out"));
  EXPECT_EQ(c.grid.family, SchemeFamily::kPerStratum);
  EXPECT_EQ(c.grid.hi, 1600.0);
  EXPECT_EQ(c.grid.order, RateOrder::kAny);
  ASSERT_TRUE(c.solver.has_value());
  EXPECT_EQ(c.solver->outer_tol, 1e-6);
  EXPECT_EQ(c.solver->step_rule, StepRule::kAdaptive);
  EXPECT_TRUE(c.metrics.simulate);
  EXPECT_EQ(c.metrics.runs, 3);
  EXPECT_EQ(c.metrics.seed, 9u);
  EXPECT_EQ(c.workers, 2);
  ASSERT_EQ(c.frontiers.size(), 1u);
  EXPECT_EQ(c.frontiers[0].second, "welfare:low");

  const SweepConfig list = ParseSweepConfig(
      R"({"instance": "i.json", "schemes": [{"family": "uniform", "rates": [0]},
                                            {"family": "per_area", "rates": [1, 2, 3, 4]}]})");
  ASSERT_EQ(list.schemes.size(), 2u);
  EXPECT_EQ(list.schemes[1].id(), "a_1_2_3_4");

  EXPECT_THROW(ParseSweepConfig(R"({"instance": "i.json"})"), ValidationError);
  EXPECT_THROW(ParseSweepConfig(R"({"instance": "i.json", "scheme": {"grid": "0:1:1"},
                                    "colour": 1})"),
               ValidationError);
  EXPECT_THROW(ParseSweepConfig(R"({"scheme": {"grid": "0:1:1"}})"), ValidationError);
}

}  // namespace
}  // namespace mte
