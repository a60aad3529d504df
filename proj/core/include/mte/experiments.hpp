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

#ifndef MTE_EXPERIMENTS_HPP_
#define MTE_EXPERIMENTS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mte/instance.hpp"
#include "mte/pricing.hpp"
#include "mte/solver_options.hpp"

namespace mte {

// Version of results.csv, manifest.json and schemes/<id>.json.
inline constexpr int kResultsSchemaVersion = 1;

struct SweepMetricsOptions {
  bool simulate = false;
  int runs = 10;
  std::uint64_t seed = 0;
};

struct SweepConfig {
  std::filesystem::path instance_path;
  // Grid over rates; ignored when `schemes` is nonempty.
  GridSpec grid;
  std::vector<SchemeSpec> schemes;
  int area_rows = 2;
  int area_cols = 2;
  // The instance's own settings when empty.
  std::optional<SolverOptions> solver;
  SweepMetricsOptions metrics;
  int workers = 1;
  // Empty: nothing is written.
  std::filesystem::path output;
  // Objective pairs written as frontier_<x>_<y>.csv.
  std::vector<std::pair<std::string, std::string>> frontiers = {
      {"total_welfare", "total_revenue"}};
};

// Parses a sweep config document. Relative paths resolve against
// `base_dir`. A "solver" object starts from SolverOptions defaults.
SweepConfig ParseSweepConfig(const std::string& text,
                             const std::filesystem::path& base_dir = {});
SweepConfig LoadSweepConfig(const std::filesystem::path& path);

struct StratumResult {
  std::string name;
  double welfare = 0.0;
  double welfare_delta = 0.0;
  double revenue = 0.0;
  double trips_started = 0.0;
  double started_share = 0.0;
  std::optional<double> primary_share;
  std::optional<double> average_speed_kmh;
  // Filled when the sweep simulates.
  std::optional<double> sim_started_share;
  std::optional<double> sim_primary_share;
  std::optional<double> sim_mean_time;
};

struct ResultRow {
  std::string scheme_id;
  SchemeFamily family = SchemeFamily::kUniform;
  std::vector<double> rates;
  bool baseline = false;
  std::vector<StratumResult> strata;
  double total_welfare = 0.0;
  double total_welfare_delta = 0.0;
  double total_revenue = 0.0;
  double trips_started = 0.0;
  std::optional<double> primary_share;
  std::optional<double> average_speed_kmh;
  bool converged = false;
  bool inner_converged = false;
  int outer_iterations = 0;
  double outer_residual = 0.0;
  // Nonempty when the scheme could not be evaluated.
  std::string error;
};

bool operator==(const StratumResult& a, const StratumResult& b);
bool operator==(const ResultRow& a, const ResultRow& b);

struct ResultsTable {
  std::vector<std::string> strata;
  std::vector<ResultRow> rows;
};

struct SweepResult {
  ResultsTable table;
  std::size_t computed = 0;  // schemes solved in this run
  std::size_t reused = 0;    // schemes read back from the output directory
  std::vector<std::string> warnings;
};

// Schemes a config evaluates, in row order (baseline excluded).
std::vector<SchemeSpec> SweepSchemes(const SweepConfig& config, const Instance& instance);

// Solves the zero-price baseline, then every scheme. With an output
// directory, each finished scheme is flushed to schemes/<id>.json and
// schemes already present there are read back instead of solved.
SweepResult RunSweep(const SweepConfig& config, const Instance& instance,
                     const std::function<void(const ResultRow&)>& on_row = {});
SweepResult RunSweep(const SweepConfig& config);

// Writes manifest.json, schemes/<id>.json, results.csv and the frontier
// files of `frontiers`.
void PersistResults(const ResultsTable& table, const std::filesystem::path& directory,
                    const std::vector<std::pair<std::string, std::string>>& frontiers = {});
// Empty table plus a warning when the directory holds no results; throws
// SchemaVersionError on a version mismatch.
ResultsTable LoadResults(const std::filesystem::path& directory,
                         std::vector<std::string>* warnings = nullptr);

std::string ResultsToCsv(const ResultsTable& table);
std::string ResultRowToJson(const ResultRow& row);
ResultRow ResultRowFromJson(const std::string& text);

// Named objective of a row: total_welfare, total_welfare_delta,
// total_revenue, trips_started, primary_share, average_speed_kmh, or
// <metric>:<stratum> with metric one of welfare, welfare_delta, revenue,
// trips_started, started_share, primary_share, average_speed_kmh. Empty
// when the row has no value (failed scheme, undefined share). Throws
// ValidationError for an unknown name.
std::optional<double> ObjectiveValue(const ResultsTable& table, const ResultRow& row,
                                     const std::string& name);

// Rows not dominated in (x, y), both maximized. Rows lacking either value
// are ignored. Duplicates collapse by scheme id, then by equal (x, y)
// keeping the smallest rate vector. Sorted by x ascending.
std::vector<ResultRow> ParetoFrontier(const ResultsTable& table, const std::string& x,
                                      const std::string& y);

std::string FrontierToCsv(const ResultsTable& table, const std::vector<ResultRow>& frontier,
                          const std::string& x, const std::string& y);
std::string FrontierFileName(const std::string& x, const std::string& y);

enum class ScalarizedMode { kWelfareVsTotalWelfare, kWelfareVsRevenue };

const char* ScalarizedModeName(ScalarizedMode mode);
ScalarizedMode ParseScalarizedMode(const std::string& name);

struct ScalarizedObjective {
  std::string stratum;
  double lambda = 0.5;
  ScalarizedMode mode = ScalarizedMode::kWelfareVsTotalWelfare;
};

// Objective names (x, y) whose frontier contains the scalarized optimum.
std::pair<std::string, std::string> ScalarizedAxes(const ScalarizedObjective& objective);

// argmax of lambda * W^s + (1 - lambda) * (W or R). Among exact ties,
// rows dominated by another tied row go first, then the lexicographically
// smallest rate vector wins. Throws ValidationError on empty input or
// lambda outside [0, 1].
ResultRow BestScalarized(const ResultsTable& table, const ScalarizedObjective& objective);

}  // namespace mte

#endif  // MTE_EXPERIMENTS_HPP_
