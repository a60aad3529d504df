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

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cli.hpp"
#include "mte/experiments.hpp"
#include "mte/instance.hpp"
#include "mte/metrics.hpp"
#include "mte/solution_io.hpp"
#include "test_support.hpp"

namespace mte {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome Mte(std::vector<std::string> args) {
  args.insert(args.begin(), "mte");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::Run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

const std::vector<std::string> kTight = {"--tol-inner", "1e-8", "--tol-outer", "1e-6",
                                         "--max-outer", "5000", "--step-rule", "adaptive"};

std::vector<std::string> With(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = testing::TempDir("cli");
    instance_ = (dir_ / "single_od.json").string();
    ASSERT_EQ(Mte({"generate", "single-od", "--out", instance_}).code, cli::kExitOk);
  }
  fs::path dir_;
  std::string instance_;
};

TEST_F(CliTest, GenerateAndValidate) {
  const Instance inst = LoadInstance(instance_);
  EXPECT_EQ(inst.network().num_nodes(), 4u);
  const Outcome v = Mte({"validate", "--instance", instance_});
  EXPECT_EQ(v.code, cli::kExitOk);
  EXPECT_NE(v.out.find("4 nodes"), std::string::npos);

  const std::string grid = (dir_ / "grid.json").string();
  EXPECT_EQ(Mte({"generate", "grid", "--rows", "4", "--cols", "4", "--min-distance", "1",
                 "--out", grid})
                .code,
            cli::kExitOk);
  EXPECT_EQ(LoadInstance(grid).network().num_nodes(), 16u);
  EXPECT_EQ(Mte({"generate", "grid", "--spec", R"({"rows": 3, "cols": 3, "min_distance_km": 0})",
                 "--out", grid})
                .code,
            cli::kExitOk);
  EXPECT_EQ(LoadInstance(grid).network().num_nodes(), 9u);
}

TEST_F(CliTest, SolveWritesReadableFilesAndIsRepeatable) {
  const std::string out = (dir_ / "solve").string();
  const auto args = With({"solve", "--instance", instance_, "--scheme", "uniform", "--rate",
                          "200", "--out", out},
                         kTight);
  ASSERT_EQ(Mte(args).code, cli::kExitOk);
  const Instance inst = LoadInstance(instance_);
  const StoredSolution s = LoadSolution(inst, fs::path(out) / "solution.json");
  EXPECT_TRUE(s.solution.converged);
  EXPECT_EQ(s.scheme->id(), "u_200");
  const MetricsReport m = MetricsFromJson(inst, ReadTextFile(fs::path(out) / "metrics.json"));
  EXPECT_GT(m.total_revenue, 0.0);
  EXPECT_TRUE(fs::exists(fs::path(out) / "metrics.csv"));

  const std::string again = (dir_ / "solve2").string();
  ASSERT_EQ(Mte(With({"solve", "--instance", instance_, "--scheme", "uniform", "--rate", "200",
                      "--out", again},
                     kTight))
                .code,
            cli::kExitOk);
  for (const char* f : {"solution.json", "metrics.json", "metrics.csv"}) {
    EXPECT_EQ(ReadTextFile(fs::path(out) / f), ReadTextFile(fs::path(again) / f)) << f;
  }
}

TEST_F(CliTest, SolveNonConvergenceExitsTwoAndStillWrites) {
  const std::string out = (dir_ / "short").string();
  const Outcome o = Mte({"solve", "--instance", instance_, "--rate", "200", "--out", out,
                         "--tol-outer", "1e-12", "--max-outer", "2"});
  EXPECT_EQ(o.code, cli::kExitNotConverged);
  const Instance inst = LoadInstance(instance_);
  EXPECT_FALSE(LoadSolution(inst, fs::path(out) / "solution.json").solution.converged);
}

TEST_F(CliTest, SweepParetoSimulateLoop) {
  const std::string results = (dir_ / "sweep").string();
  ASSERT_EQ(Mte(With({"sweep", "--instance", instance_, "--grid", "0:400:100", "--out", results},
                     kTight))
                .code,
            cli::kExitOk);
  const ResultsTable t = LoadResults(results);
  EXPECT_EQ(t.rows.size(), 6u);

  const std::string frontier = (dir_ / "front.csv").string();
  const Outcome p = Mte({"pareto", "--results", results, "--x", "total_welfare", "--y",
                         "welfare:low", "--out", frontier, "--stratum", "low"});
  EXPECT_EQ(p.code, cli::kExitOk);
  EXPECT_EQ(ReadTextFile(frontier).rfind("scheme_id,family,rates,total_welfare,welfare:low", 0),
            0u);

  const std::string solved = (dir_ / "solved").string();
  ASSERT_EQ(Mte(With({"solve", "--instance", instance_, "--rate", "100", "--out", solved}, kTight))
                .code,
            cli::kExitOk);
  const std::string sim = (dir_ / "sim").string();
  const Outcome s = Mte({"simulate", "--instance", instance_, "--solution",
                         (fs::path(solved) / "solution.json").string(), "--out", sim, "--runs",
                         "2", "--seed", "5"});
  EXPECT_EQ(s.code, cli::kExitOk);
  const MetricsReport m =
      MetricsFromJson(LoadInstance(instance_), ReadTextFile(fs::path(sim) / "simulation.json"));
  EXPECT_EQ(m.provenance, "simulated");
  EXPECT_EQ(m.seed, 5u);
  EXPECT_EQ(m.runs, 2);
}

TEST_F(CliTest, ExitCodesForBadInput) {
  EXPECT_EQ(Mte({}).code, cli::kExitValidation);
  EXPECT_EQ(Mte({"frobnicate"}).code, cli::kExitValidation);
  EXPECT_EQ(Mte({"solve", "--instance", instance_}).code, cli::kExitValidation);
  EXPECT_EQ(Mte({"solve", "--instance", (dir_ / "nope.json").string(), "--out",
                 (dir_ / "x").string()})
                .code,
            cli::kExitValidation);
  EXPECT_EQ(Mte({"solve", "--instance", instance_, "--out", (dir_ / "x").string(), "--bogus"})
                .code,
            cli::kExitValidation);
  EXPECT_EQ(Mte({"pareto", "--results", (dir_ / "empty").string(), "--x", "happiness"}).code,
            cli::kExitValidation);
  EXPECT_EQ(Mte({"--help"}).code, cli::kExitOk);
}

TEST_F(CliTest, InfeasibleInstanceExitsTwo) {
  std::string text = ReadTextFile(instance_);
  const auto pos = text.find("\"seconds\"");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, 9, "\"hours\"");
  const std::string hours = (dir_ / "hours.json").string();
  WriteTextFileAtomic(hours, text);
  EXPECT_EQ(Mte({"solve", "--instance", hours, "--out", (dir_ / "h").string()}).code,
            cli::kExitNotConverged);
}

}  // namespace
}  // namespace mte
