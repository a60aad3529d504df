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

#include "mte/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <system_error>
#include <tuple>

#include "json.hpp"
#include "mte/equilibrium.hpp"
#include "mte/errors.hpp"
#include "mte/metrics.hpp"
#include "mte/solution_io.hpp"
#include "parallel.hpp"

namespace mte {
namespace {

using json = nlohmann::json;

const char* const kBaselineId = "baseline";

// --- config --------------------------------------------------------------

void CheckKeys(const json& obj, const std::string& path,
               std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) known = known || it.key() == k;
    if (!known) throw ValidationError(path + "." + it.key(), "unknown field");
  }
}

double Number(const json& obj, const char* key, const std::string& path) {
  const json& v = obj.at(key);
  if (!v.is_number()) throw ValidationError(path + "." + key, "expected a number");
  return v.get<double>();
}

int Integer(const json& obj, const char* key, const std::string& path) {
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ValidationError(path + "." + key, "expected an integer");
  return v.get<int>();
}

std::string Text(const json& obj, const char* key, const std::string& path) {
  const json& v = obj.at(key);
  if (!v.is_string()) throw ValidationError(path + "." + key, "expected a string");
  return v.get<std::string>();
}

SolverOptions ParseSolver(const json& s) {
  if (!s.is_object()) throw ValidationError("solver", "expected an object");
  CheckKeys(s, "solver",
            {"inner_tol", "inner_max_iters", "outer_tol", "outer_max_iters", "step_rule",
             "divergence_guard", "divergence_window"});
  SolverOptions o;
  if (s.contains("inner_tol")) o.inner_tol = Number(s, "inner_tol", "solver");
  if (s.contains("inner_max_iters")) o.inner_max_iters = Integer(s, "inner_max_iters", "solver");
  if (s.contains("outer_tol")) o.outer_tol = Number(s, "outer_tol", "solver");
  if (s.contains("outer_max_iters")) o.outer_max_iters = Integer(s, "outer_max_iters", "solver");
  if (s.contains("step_rule")) o.step_rule = ParseStepRule(Text(s, "step_rule", "solver"));
  if (s.contains("divergence_guard")) {
    o.divergence_guard = Number(s, "divergence_guard", "solver");
  }
  if (s.contains("divergence_window")) {
    o.divergence_window = Integer(s, "divergence_window", "solver");
  }
  if (!(o.inner_tol > 0) || !(o.outer_tol > 0)) {
    throw ValidationError("solver", "tolerances must be positive");
  }
  if (o.inner_max_iters < 1 || o.outer_max_iters < 1) {
    throw ValidationError("solver", "iteration caps must be at least 1");
  }
  return o;
}

json SolverToJson(const SolverOptions& o) {
  return {{"inner_tol", o.inner_tol},
          {"inner_max_iters", o.inner_max_iters},
          {"outer_tol", o.outer_tol},
          {"outer_max_iters", o.outer_max_iters},
          {"step_rule", StepRuleName(o.step_rule)},
          {"divergence_guard", o.divergence_guard},
          {"divergence_window", o.divergence_window}};
}

std::vector<double> RatesFrom(const json& v, const std::string& path) {
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) throw ValidationError(path, "expected a number or an array");
  std::vector<double> out;
  for (const json& x : v) {
    if (!x.is_number()) throw ValidationError(path, "expected numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

// --- formatting ----------------------------------------------------------

std::string FormatDouble(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string FormatOptional(const std::optional<double>& v) {
  return v ? FormatDouble(*v) : std::string();
}

std::string JoinRates(const std::vector<double>& rates) {
  std::string out;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (i) out += ';';
    out += FormatDouble(rates[i]);
  }
  return out;
}

std::string CsvQuote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

json OptionalJson(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<double> OptionalFrom(const json& v) {
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

json RowJson(const ResultRow& row) {
  json strata = json::array();
  for (const StratumResult& s : row.strata) {
    strata.push_back({{"name", s.name},
                      {"welfare", s.welfare},
                      {"welfare_delta", s.welfare_delta},
                      {"revenue", s.revenue},
                      {"trips_started", s.trips_started},
                      {"started_share", s.started_share},
                      {"primary_share", OptionalJson(s.primary_share)},
                      {"average_speed_kmh", OptionalJson(s.average_speed_kmh)},
                      {"sim_started_share", OptionalJson(s.sim_started_share)},
                      {"sim_primary_share", OptionalJson(s.sim_primary_share)},
                      {"sim_mean_time", OptionalJson(s.sim_mean_time)}});
  }
  return {{"scheme_id", row.scheme_id},
          {"family", SchemeFamilyName(row.family)},
          {"rates", row.rates},
          {"baseline", row.baseline},
          {"strata", std::move(strata)},
          {"total_welfare", row.total_welfare},
          {"total_welfare_delta", row.total_welfare_delta},
          {"total_revenue", row.total_revenue},
          {"trips_started", row.trips_started},
          {"primary_share", OptionalJson(row.primary_share)},
          {"average_speed_kmh", OptionalJson(row.average_speed_kmh)},
          {"converged", row.converged},
          {"inner_converged", row.inner_converged},
          {"outer_iterations", row.outer_iterations},
          {"outer_residual", row.outer_residual},
          {"error", row.error}};
}

ResultRow RowFromJson(const json& j) {
  ResultRow row;
  row.scheme_id = j.at("scheme_id").get<std::string>();
  row.family = ParseSchemeFamily(j.at("family").get<std::string>());
  row.rates = j.at("rates").get<std::vector<double>>();
  row.baseline = j.at("baseline").get<bool>();
  for (const json& s : j.at("strata")) {
    StratumResult r;
    r.name = s.at("name").get<std::string>();
    r.welfare = s.at("welfare").get<double>();
    r.welfare_delta = s.at("welfare_delta").get<double>();
    r.revenue = s.at("revenue").get<double>();
    r.trips_started = s.at("trips_started").get<double>();
    r.started_share = s.at("started_share").get<double>();
    r.primary_share = OptionalFrom(s.at("primary_share"));
    r.average_speed_kmh = OptionalFrom(s.at("average_speed_kmh"));
    r.sim_started_share = OptionalFrom(s.at("sim_started_share"));
    r.sim_primary_share = OptionalFrom(s.at("sim_primary_share"));
    r.sim_mean_time = OptionalFrom(s.at("sim_mean_time"));
    row.strata.push_back(std::move(r));
  }
  row.total_welfare = j.at("total_welfare").get<double>();
  row.total_welfare_delta = j.at("total_welfare_delta").get<double>();
  row.total_revenue = j.at("total_revenue").get<double>();
  row.trips_started = j.at("trips_started").get<double>();
  row.primary_share = OptionalFrom(j.at("primary_share"));
  row.average_speed_kmh = OptionalFrom(j.at("average_speed_kmh"));
  row.converged = j.at("converged").get<bool>();
  row.inner_converged = j.at("inner_converged").get<bool>();
  row.outer_iterations = j.at("outer_iterations").get<int>();
  row.outer_residual = j.at("outer_residual").get<double>();
  row.error = j.at("error").get<std::string>();
  return row;
}

void CheckVersion(const json& doc, const std::string& what) {
  const json& v = doc.contains("schema_version") ? doc["schema_version"] : json(nullptr);
  if (!v.is_number_integer() || v.get<int>() != kResultsSchemaVersion) {
    throw SchemaVersionError(what + " has schema version " +
                             (v.is_null() ? std::string("(none)") : v.dump()) +
                             ", expected " + std::to_string(kResultsSchemaVersion));
  }
}

json ParseJsonFile(const std::filesystem::path& path) {
  try {
    return json::parse(ReadTextFile(path));
  } catch (const json::exception& e) {
    throw ValidationError(path.string(), std::string("malformed JSON: ") + e.what());
  }
}

std::filesystem::path DetailPath(const std::filesystem::path& dir, const std::string& id) {
  return dir / "schemes" / (id + ".json");
}

std::string DetailDocument(const ResultRow& row, const json& metrics) {
  json doc;
  doc["schema_version"] = kResultsSchemaVersion;
  doc["row"] = RowJson(row);
  if (!metrics.is_null()) doc["metrics"] = metrics;
  return doc.dump(1) + "\n";
}

void WriteManifest(const ResultsTable& table, const std::filesystem::path& dir,
                   const json& settings) {
  json doc;
  doc["schema_version"] = kResultsSchemaVersion;
  doc["strata"] = table.strata;
  std::vector<std::string> ids;
  for (const ResultRow& r : table.rows) ids.push_back(r.scheme_id);
  doc["schemes"] = ids;
  doc["settings"] = settings;
  WriteTextFileAtomic(dir / "manifest.json", doc.dump(1) + "\n");
}

void WriteSummaries(const ResultsTable& table, const std::filesystem::path& dir,
                    const std::vector<std::pair<std::string, std::string>>& frontiers) {
  WriteTextFileAtomic(dir / "results.csv", ResultsToCsv(table));
  for (const auto& [x, y] : frontiers) {
    WriteTextFileAtomic(dir / FrontierFileName(x, y),
                        FrontierToCsv(table, ParetoFrontier(table, x, y), x, y));
  }
}

// 64-bit FNV-1a; identifies the instance a results directory belongs to.
std::uint64_t Fingerprint(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// --- evaluation ----------------------------------------------------------

void FillMetrics(const MetricsReport& report, const EquilibriumSolution& solution,
                 ResultRow* row) {
  row->strata.clear();
  for (const StratumMetrics& m : report.strata) {
    StratumResult s;
    s.name = m.name;
    s.welfare = m.welfare;
    s.welfare_delta = m.welfare_delta;
    s.revenue = m.revenue;
    s.trips_started = m.trips_started;
    s.started_share = m.started_share;
    s.primary_share = m.primary_share;
    s.average_speed_kmh = m.average_speed_kmh;
    row->strata.push_back(std::move(s));
  }
  row->total_welfare = report.total_welfare;
  row->total_welfare_delta = report.total_welfare_delta;
  row->total_revenue = report.total_revenue;
  row->trips_started = report.trips_started;
  row->primary_share = report.primary_share;
  row->average_speed_kmh = report.average_speed_kmh;
  row->converged = solution.converged;
  row->inner_converged = solution.inner_converged;
  row->outer_iterations = solution.outer_iterations;
  row->outer_residual = solution.outer_residual;
}

void FillSimulation(const Instance& instance, const ExpandedPrices& prices,
                    const EquilibriumSolution& solution, const SweepMetricsOptions& options,
                    ResultRow* row) {
  SimulationOptions sim;
  sim.runs_per_unit = options.runs;
  sim.seed = options.seed;
  sim.workers = 1;
  const SimulationReport report = SimulateTrips(instance, prices, solution, sim);
  for (std::size_t s = 0; s < row->strata.size(); ++s) {
    const StratumSimulation& st = report.strata[s];
    StratumResult& r = row->strata[s];
    if (st.samples > 0) r.sim_started_share = st.started_share.value;
    if (st.started > st.truncated) {
      r.sim_primary_share = st.primary_share.value;
      r.sim_mean_time = st.mean_time.value;
    }
  }
}

StratumResult Named(const std::string& name) {
  StratumResult s;
  s.name = name;
  return s;
}

struct Evaluated {
  ResultRow row;
  json metrics;
};

Evaluated Evaluate(const Instance& instance, const SchemeSpec& spec,
                   const AreaAssignment* areas, const EquilibriumSolution& baseline,
                   const SolverOptions& solver, const SweepMetricsOptions& metrics) {
  Evaluated out;
  out.row.scheme_id = spec.id();
  out.row.family = spec.family;
  out.row.rates = spec.rates;
  for (const Stratum& s : instance.strata()) out.row.strata.push_back(Named(s.name));
  try {
    const ExpandedPrices prices = ExpandScheme(spec, instance, areas);
    const EquilibriumSolution solution = SolveEquilibrium(instance, prices, solver);
    const MetricsReport report = ComputeMetrics(instance, prices, solution, baseline);
    FillMetrics(report, solution, &out.row);
    if (metrics.simulate) FillSimulation(instance, prices, solution, metrics, &out.row);
    out.metrics = json::parse(MetricsToJson(instance, report));
  } catch (const std::exception& e) {
    ResultRow failed;
    failed.scheme_id = out.row.scheme_id;
    failed.family = out.row.family;
    failed.rates = out.row.rates;
    for (const Stratum& s : instance.strata()) failed.strata.push_back(Named(s.name));
    failed.error = e.what();
    if (failed.error.empty()) failed.error = "unknown error";
    out.row = std::move(failed);
    out.metrics = nullptr;
  }
  return out;
}

const StratumResult* FindStratum(const ResultsTable& table, const ResultRow& row,
                                 const std::string& name) {
  for (std::size_t s = 0; s < table.strata.size() && s < row.strata.size(); ++s) {
    if (table.strata[s] == name) return &row.strata[s];
  }
  return nullptr;
}

std::string Sanitize(const std::string& name) {
  std::string out = name;
  for (char& c : out) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '.';
    if (!ok) c = '-';
  }
  return out;
}

}  // namespace

// --- public --------------------------------------------------------------

bool operator==(const StratumResult& a, const StratumResult& b) {
  return a.name == b.name && a.welfare == b.welfare && a.welfare_delta == b.welfare_delta &&
         a.revenue == b.revenue && a.trips_started == b.trips_started &&
         a.started_share == b.started_share && a.primary_share == b.primary_share &&
         a.average_speed_kmh == b.average_speed_kmh &&
         a.sim_started_share == b.sim_started_share &&
         a.sim_primary_share == b.sim_primary_share && a.sim_mean_time == b.sim_mean_time;
}

bool operator==(const ResultRow& a, const ResultRow& b) {
  return a.scheme_id == b.scheme_id && a.family == b.family && a.rates == b.rates &&
         a.baseline == b.baseline && a.strata == b.strata &&
         a.total_welfare == b.total_welfare &&
         a.total_welfare_delta == b.total_welfare_delta &&
         a.total_revenue == b.total_revenue && a.trips_started == b.trips_started &&
         a.primary_share == b.primary_share && a.average_speed_kmh == b.average_speed_kmh &&
         a.converged == b.converged && a.inner_converged == b.inner_converged &&
         a.outer_iterations == b.outer_iterations && a.outer_residual == b.outer_residual &&
         a.error == b.error;
}

SweepConfig ParseSweepConfig(const std::string& text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError("config", std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("config", "expected an object");
  CheckKeys(doc, "config",
            {"schema_version", "instance", "scheme", "schemes", "solver", "metrics", "workers",
             "output", "frontiers"});
  SweepConfig config;
  if (!doc.contains("instance")) throw ValidationError("config.instance", "required");
  config.instance_path = base_dir / Text(doc, "instance", "config");

  if (doc.contains("scheme")) {
    const json& s = doc["scheme"];
    if (!s.is_object()) throw ValidationError("config.scheme", "expected an object");
    CheckKeys(s, "config.scheme", {"family", "grid", "values", "order", "areas"});
    if (s.contains("family")) {
      config.grid.family = ParseSchemeFamily(Text(s, "family", "config.scheme"));
    }
    if (s.contains("grid")) {
      const json& g = s["grid"];
      if (g.is_string()) {
        const GridSpec range = ParseGridRange(g.get<std::string>());
        config.grid.lo = range.lo;
        config.grid.hi = range.hi;
        config.grid.step = range.step;
      } else if (g.is_object()) {
        CheckKeys(g, "config.scheme.grid", {"lo", "hi", "step"});
        config.grid.lo = Number(g, "lo", "config.scheme.grid");
        config.grid.hi = Number(g, "hi", "config.scheme.grid");
        config.grid.step = Number(g, "step", "config.scheme.grid");
      } else {
        throw ValidationError("config.scheme.grid", "expected \"LO:HI:STEP\" or an object");
      }
    }
    if (s.contains("values")) config.grid.values = RatesFrom(s["values"], "config.scheme.values");
    if (s.contains("order")) config.grid.order = ParseRateOrder(Text(s, "order", "config.scheme"));
    if (s.contains("areas")) {
      std::tie(config.area_rows, config.area_cols) =
          ParseGridShape(Text(s, "areas", "config.scheme"));
    }
    if (!s.contains("grid") && !s.contains("values")) {
      throw ValidationError("config.scheme", "needs \"grid\" or \"values\"");
    }
  }
  if (doc.contains("schemes")) {
    const json& list = doc["schemes"];
    if (!list.is_array()) throw ValidationError("config.schemes", "expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string path = "config.schemes[" + std::to_string(i) + "]";
      const json& e = list[i];
      if (!e.is_object()) throw ValidationError(path, "expected an object");
      CheckKeys(e, path, {"family", "rates"});
      SchemeSpec spec;
      spec.family = ParseSchemeFamily(Text(e, "family", path));
      if (!e.contains("rates")) throw ValidationError(path + ".rates", "required");
      spec.rates = RatesFrom(e["rates"], path + ".rates");
      config.schemes.push_back(std::move(spec));
    }
  }
  if (!doc.contains("scheme") && config.schemes.empty()) {
    throw ValidationError("config", "needs \"scheme\" or a nonempty \"schemes\" list");
  }
  if (doc.contains("solver")) config.solver = ParseSolver(doc["solver"]);
  if (doc.contains("metrics")) {
    const json& m = doc["metrics"];
    if (!m.is_object()) throw ValidationError("config.metrics", "expected an object");
    CheckKeys(m, "config.metrics", {"simulate", "runs", "seed"});
    if (m.contains("simulate")) {
      if (!m["simulate"].is_boolean()) {
        throw ValidationError("config.metrics.simulate", "expected a boolean");
      }
      config.metrics.simulate = m["simulate"].get<bool>();
    }
    if (m.contains("runs")) config.metrics.runs = Integer(m, "runs", "config.metrics");
    if (m.contains("seed")) {
      if (!m["seed"].is_number_unsigned()) {
        throw ValidationError("config.metrics.seed", "expected a nonnegative integer");
      }
      config.metrics.seed = m["seed"].get<std::uint64_t>();
    }
    if (config.metrics.runs < 1) throw ValidationError("config.metrics.runs", "must be >= 1");
  }
  if (doc.contains("workers")) config.workers = Integer(doc, "workers", "config");
  if (config.workers < 1) throw ValidationError("config.workers", "must be >= 1");
  if (doc.contains("output")) config.output = base_dir / Text(doc, "output", "config");
  if (doc.contains("frontiers")) {
    config.frontiers.clear();
    for (const json& f : doc["frontiers"]) {
      if (!f.is_array() || f.size() != 2 || !f[0].is_string() || !f[1].is_string()) {
        throw ValidationError("config.frontiers", "expected [x, y] name pairs");
      }
      config.frontiers.emplace_back(f[0].get<std::string>(), f[1].get<std::string>());
    }
  }
  return config;
}

SweepConfig LoadSweepConfig(const std::filesystem::path& path) {
  return ParseSweepConfig(ReadTextFile(path), path.parent_path());
}

std::vector<SchemeSpec> SweepSchemes(const SweepConfig& config, const Instance& instance) {
  if (!config.schemes.empty()) return config.schemes;
  GridSpec grid = config.grid;
  switch (grid.family) {
    case SchemeFamily::kUniform:
      grid.dimension = 1;
      break;
    case SchemeFamily::kPerStratum:
      grid.dimension = instance.strata().size();
      break;
    case SchemeFamily::kPerArea:
      grid.dimension = static_cast<std::size_t>(config.area_rows * config.area_cols);
      break;
  }
  return EnumerateGrid(grid);
}

SweepResult RunSweep(const SweepConfig& config, const Instance& instance,
                     const std::function<void(const ResultRow&)>& on_row) {
  if (config.workers < 1) throw ValidationError("workers", "must be >= 1");
  SweepResult result;
  for (const Stratum& s : instance.strata()) result.table.strata.push_back(s.name);

  const std::vector<SchemeSpec> schemes = SweepSchemes(config, instance);
  {
    std::set<std::string> seen;
    for (const SchemeSpec& s : schemes) {
      if (!seen.insert(s.id()).second) {
        throw ValidationError("schemes", "duplicate scheme " + s.id());
      }
    }
  }
  std::unique_ptr<AreaAssignment> areas;
  bool needs_areas = false;
  for (const SchemeSpec& s : schemes) needs_areas |= s.family == SchemeFamily::kPerArea;
  if (needs_areas) {
    areas = std::make_unique<AreaAssignment>(
        AssignAreas(instance.network(), config.area_rows, config.area_cols));
  }

  SolverOptions solver = config.solver.value_or(instance.solver());
  solver.workers = 1;
  solver.on_iteration = nullptr;

  const bool persist = !config.output.empty();
  json settings = {{"instance_fingerprint", std::to_string(Fingerprint(SerializeInstance(instance)))},
                   {"solver", SolverToJson(solver)},
                   {"simulate", config.metrics.simulate},
                   {"runs", config.metrics.runs},
                   {"seed", config.metrics.seed},
                   {"areas", std::to_string(config.area_rows) + "x" +
                                 std::to_string(config.area_cols)}};
  if (persist) {
    const auto manifest = config.output / "manifest.json";
    if (std::filesystem::exists(manifest)) {
      const json old = ParseJsonFile(manifest);
      CheckVersion(old, manifest.string());
      if (old.value("settings", json()) != settings) {
        throw Error("output directory " + config.output.string() +
                    " holds results of a different instance or configuration");
      }
    }
  }

  // Zero-price baseline, shared by every welfare evaluation.
  const ExpandedPrices zero = ZeroPrices(instance);
  const EquilibriumSolution baseline = SolveEquilibrium(instance, zero, solver);
  if (!baseline.fully_converged()) {
    result.warnings.push_back("baseline equilibrium did not converge (residual " +
                              FormatDouble(baseline.outer_residual) + ")");
  }
  ResultRow base_row;
  base_row.scheme_id = kBaselineId;
  base_row.family = SchemeFamily::kUniform;
  base_row.rates = {0.0};
  base_row.baseline = true;
  const MetricsReport base_report = ComputeMetrics(instance, zero, baseline, baseline);
  FillMetrics(base_report, baseline, &base_row);
  if (config.metrics.simulate) {
    FillSimulation(instance, zero, baseline, config.metrics, &base_row);
  }

  std::vector<ResultRow> rows(schemes.size());
  std::vector<char> done(schemes.size(), 0);
  if (persist) {
    std::filesystem::create_directories(config.output / "schemes");
    ResultsTable pending{result.table.strata, {}};
    pending.rows.push_back(base_row);
    for (const SchemeSpec& s : schemes) {
      ResultRow r;
      r.scheme_id = s.id();
      pending.rows.push_back(std::move(r));
    }
    WriteManifest(pending, config.output, settings);
    WriteTextFileAtomic(DetailPath(config.output, kBaselineId),
                        DetailDocument(base_row, json::parse(MetricsToJson(instance, base_report))));
    for (std::size_t i = 0; i < schemes.size(); ++i) {
      const auto path = DetailPath(config.output, schemes[i].id());
      if (!std::filesystem::exists(path)) continue;
      const json doc = ParseJsonFile(path);
      CheckVersion(doc, path.string());
      ResultRow r = RowFromJson(doc.at("row"));
      if (r.scheme_id != schemes[i].id()) {
        throw Error(path.string() + " holds scheme " + r.scheme_id);
      }
      rows[i] = std::move(r);
      done[i] = 1;
      ++result.reused;
    }
  }

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < schemes.size(); ++i) {
    if (!done[i]) todo.push_back(i);
  }
  std::mutex callback_mutex;
  if (on_row) on_row(base_row);
  internal::ParallelFor(todo.size(), config.workers, [&](std::size_t k) {
    const std::size_t i = todo[k];
    Evaluated e = Evaluate(instance, schemes[i], areas.get(), baseline, solver, config.metrics);
    if (persist) {
      WriteTextFileAtomic(DetailPath(config.output, e.row.scheme_id),
                          DetailDocument(e.row, e.metrics));
    }
    rows[i] = std::move(e.row);
    if (on_row) {
      std::lock_guard<std::mutex> lock(callback_mutex);
      on_row(rows[i]);
    }
  });
  result.computed = todo.size();

  result.table.rows.push_back(std::move(base_row));
  for (ResultRow& r : rows) result.table.rows.push_back(std::move(r));
  for (const ResultRow& r : result.table.rows) {
    if (!r.error.empty()) result.warnings.push_back("scheme " + r.scheme_id + ": " + r.error);
  }
  if (persist) {
    WriteManifest(result.table, config.output, settings);
    WriteSummaries(result.table, config.output, config.frontiers);
  }
  return result;
}

SweepResult RunSweep(const SweepConfig& config) {
  const Instance instance = LoadInstance(config.instance_path);
  return RunSweep(config, instance);
}

void PersistResults(const ResultsTable& table, const std::filesystem::path& directory,
                    const std::vector<std::pair<std::string, std::string>>& frontiers) {
  std::filesystem::create_directories(directory / "schemes");
  for (const ResultRow& r : table.rows) {
    WriteTextFileAtomic(DetailPath(directory, r.scheme_id), DetailDocument(r, nullptr));
  }
  WriteManifest(table, directory, nullptr);
  WriteSummaries(table, directory, frontiers);
}

ResultsTable LoadResults(const std::filesystem::path& directory,
                         std::vector<std::string>* warnings) {
  ResultsTable table;
  const auto manifest = directory / "manifest.json";
  if (!std::filesystem::exists(manifest)) {
    if (warnings) warnings->push_back("no results found in " + directory.string());
    return table;
  }
  const json doc = ParseJsonFile(manifest);
  CheckVersion(doc, manifest.string());
  try {
    table.strata = doc.at("strata").get<std::vector<std::string>>();
    for (const std::string& id : doc.at("schemes").get<std::vector<std::string>>()) {
      const auto path = DetailPath(directory, id);
      if (!std::filesystem::exists(path)) {
        if (warnings) warnings->push_back("missing result for scheme " + id);
        continue;
      }
      const json detail = ParseJsonFile(path);
      CheckVersion(detail, path.string());
      table.rows.push_back(RowFromJson(detail.at("row")));
    }
  } catch (const json::exception& e) {
    throw ValidationError(directory.string(), std::string("bad results: ") + e.what());
  }
  return table;
}

std::string ResultsToCsv(const ResultsTable& table) {
  std::ostringstream out;
  out << "scheme_id,family,baseline,rates,converged,inner_converged,outer_iterations,"
         "outer_residual,total_welfare,total_welfare_delta,total_revenue,trips_started,"
         "primary_share,average_speed_kmh";
  for (const std::string& s : table.strata) {
    for (const char* m : {"welfare", "welfare_delta", "revenue", "trips_started",
                          "started_share", "primary_share", "average_speed_kmh",
                          "sim_started_share", "sim_primary_share", "sim_mean_time"}) {
      out << ',' << CsvQuote(std::string(m) + ":" + s);
    }
  }
  out << ",error\n";
  for (const ResultRow& r : table.rows) {
    out << CsvQuote(r.scheme_id) << ',' << SchemeFamilyName(r.family) << ','
        << (r.baseline ? "true" : "false") << ',' << JoinRates(r.rates) << ','
        << (r.converged ? "true" : "false") << ',' << (r.inner_converged ? "true" : "false")
        << ',' << r.outer_iterations << ',' << FormatDouble(r.outer_residual) << ','
        << FormatDouble(r.total_welfare) << ',' << FormatDouble(r.total_welfare_delta) << ','
        << FormatDouble(r.total_revenue) << ',' << FormatDouble(r.trips_started) << ','
        << FormatOptional(r.primary_share) << ',' << FormatOptional(r.average_speed_kmh);
    for (std::size_t s = 0; s < table.strata.size(); ++s) {
      if (s >= r.strata.size()) {
        out << ",,,,,,,,,,";
        continue;
      }
      const StratumResult& v = r.strata[s];
      out << ',' << FormatDouble(v.welfare) << ',' << FormatDouble(v.welfare_delta) << ','
          << FormatDouble(v.revenue) << ',' << FormatDouble(v.trips_started) << ','
          << FormatDouble(v.started_share) << ',' << FormatOptional(v.primary_share) << ','
          << FormatOptional(v.average_speed_kmh) << ',' << FormatOptional(v.sim_started_share)
          << ',' << FormatOptional(v.sim_primary_share) << ','
          << FormatOptional(v.sim_mean_time);
    }
    out << ',' << CsvQuote(r.error) << '\n';
  }
  return out.str();
}

std::string ResultRowToJson(const ResultRow& row) { return RowJson(row).dump(); }

ResultRow ResultRowFromJson(const std::string& text) {
  try {
    return RowFromJson(json::parse(text));
  } catch (const json::exception& e) {
    throw ValidationError("row", std::string("bad result row: ") + e.what());
  }
}

namespace {

const std::set<std::string> kRowObjectives = {"total_welfare",  "total_welfare_delta",
                                              "total_revenue",  "trips_started",
                                              "primary_share",  "average_speed_kmh"};
const std::set<std::string> kStratumObjectives = {
    "welfare", "welfare_delta", "revenue", "trips_started", "started_share",
    "primary_share", "average_speed_kmh"};

// Throws for names no row could carry. Stratum names are only checked
// against a table that lists its strata.
void CheckObjective(const ResultsTable& table, const std::string& name) {
  const auto colon = name.find(':');
  if (colon == std::string::npos) {
    if (!kRowObjectives.count(name)) {
      throw ValidationError("objective", "unknown objective " + name);
    }
    return;
  }
  if (!kStratumObjectives.count(name.substr(0, colon))) {
    throw ValidationError("objective", "unknown objective " + name);
  }
  const std::string stratum = name.substr(colon + 1);
  if (!table.strata.empty() &&
      std::find(table.strata.begin(), table.strata.end(), stratum) == table.strata.end()) {
    throw ValidationError("objective", "unknown stratum in " + name);
  }
}

}  // namespace

std::optional<double> ObjectiveValue(const ResultsTable& table, const ResultRow& row,
                                     const std::string& name) {
  std::optional<double> value;
  const auto colon = name.find(':');
  if (colon == std::string::npos) {
    if (name == "total_welfare") {
      value = row.total_welfare;
    } else if (name == "total_welfare_delta") {
      value = row.total_welfare_delta;
    } else if (name == "total_revenue") {
      value = row.total_revenue;
    } else if (name == "trips_started") {
      value = row.trips_started;
    } else if (name == "primary_share") {
      value = row.primary_share;
    } else if (name == "average_speed_kmh") {
      value = row.average_speed_kmh;
    } else {
      throw ValidationError("objective", "unknown objective " + name);
    }
  } else {
    const std::string metric = name.substr(0, colon);
    const std::string stratum = name.substr(colon + 1);
    if (std::find(table.strata.begin(), table.strata.end(), stratum) == table.strata.end()) {
      throw ValidationError("objective", "unknown stratum in " + name);
    }
    const StratumResult* s = FindStratum(table, row, stratum);
    if (s == nullptr) return std::nullopt;
    if (metric == "welfare") {
      value = s->welfare;
    } else if (metric == "welfare_delta") {
      value = s->welfare_delta;
    } else if (metric == "revenue") {
      value = s->revenue;
    } else if (metric == "trips_started") {
      value = s->trips_started;
    } else if (metric == "started_share") {
      value = s->started_share;
    } else if (metric == "primary_share") {
      value = s->primary_share;
    } else if (metric == "average_speed_kmh") {
      value = s->average_speed_kmh;
    } else {
      throw ValidationError("objective", "unknown objective " + name);
    }
  }
  if (!row.error.empty()) return std::nullopt;
  if (value && std::isnan(*value)) return std::nullopt;
  return value;
}

std::vector<ResultRow> ParetoFrontier(const ResultsTable& table, const std::string& x,
                                      const std::string& y) {
  CheckObjective(table, x);
  CheckObjective(table, y);
  struct Point {
    double x, y;
    const ResultRow* row;
  };
  std::vector<Point> points;
  std::set<std::string> ids;
  for (const ResultRow& r : table.rows) {
    const auto vx = ObjectiveValue(table, r, x);
    const auto vy = ObjectiveValue(table, r, y);
    if (!vx || !vy) continue;
    if (!ids.insert(r.scheme_id).second) continue;
    points.push_back({*vx, *vy, &r});
  }
  // Equal (x, y): keep the smallest rate vector, first one on a tie.
  std::stable_sort(points.begin(), points.end(), [](const Point& a, const Point& b) {
    if (a.x != b.x) return a.x > b.x;
    if (a.y != b.y) return a.y > b.y;
    return a.row->rates < b.row->rates;
  });
  std::vector<ResultRow> out;
  double best_y = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i > 0 && points[i].x == points[i - 1].x && points[i].y == points[i - 1].y) continue;
    if (points[i].y > best_y) {
      out.push_back(*points[i].row);
      best_y = points[i].y;
    }
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::string FrontierFileName(const std::string& x, const std::string& y) {
  return "frontier_" + Sanitize(x) + "_" + Sanitize(y) + ".csv";
}

std::string FrontierToCsv(const ResultsTable& table, const std::vector<ResultRow>& frontier,
                          const std::string& x, const std::string& y) {
  std::ostringstream out;
  out << "scheme_id,family,rates," << CsvQuote(x) << ',' << CsvQuote(y) << '\n';
  for (const ResultRow& r : frontier) {
    out << CsvQuote(r.scheme_id) << ',' << SchemeFamilyName(r.family) << ','
        << JoinRates(r.rates) << ',' << FormatOptional(ObjectiveValue(table, r, x)) << ','
        << FormatOptional(ObjectiveValue(table, r, y)) << '\n';
  }
  return out.str();
}

const char* ScalarizedModeName(ScalarizedMode mode) {
  return mode == ScalarizedMode::kWelfareVsRevenue ? "welfare_vs_revenue"
                                                   : "welfare_vs_total_welfare";
}

ScalarizedMode ParseScalarizedMode(const std::string& name) {
  if (name == "welfare_vs_total_welfare") return ScalarizedMode::kWelfareVsTotalWelfare;
  if (name == "welfare_vs_revenue") return ScalarizedMode::kWelfareVsRevenue;
  throw ValidationError("mode", "unknown scalarization mode " + name);
}

std::pair<std::string, std::string> ScalarizedAxes(const ScalarizedObjective& objective) {
  return {"welfare:" + objective.stratum,
          objective.mode == ScalarizedMode::kWelfareVsRevenue ? "total_revenue"
                                                               : "total_welfare"};
}

ResultRow BestScalarized(const ResultsTable& table, const ScalarizedObjective& objective) {
  if (!(objective.lambda >= 0.0 && objective.lambda <= 1.0)) {
    throw ValidationError("lambda", "must lie in [0, 1]");
  }
  const auto [xn, yn] = ScalarizedAxes(objective);
  CheckObjective(table, xn);
  CheckObjective(table, yn);
  struct Candidate {
    double x, y, value;
    const ResultRow* row;
  };
  std::vector<Candidate> cands;
  for (const ResultRow& r : table.rows) {
    const auto vx = ObjectiveValue(table, r, xn);
    const auto vy = ObjectiveValue(table, r, yn);
    if (!vx || !vy) continue;
    const double v = objective.lambda * *vx + (1.0 - objective.lambda) * *vy;
    cands.push_back({*vx, *vy, v, &r});
  }
  if (cands.empty()) throw ValidationError("rows", "no row carries both objectives");
  double best = -std::numeric_limits<double>::infinity();
  for (const Candidate& c : cands) best = std::max(best, c.value);
  std::vector<const Candidate*> tied;
  for (const Candidate& c : cands) {
    if (c.value == best) tied.push_back(&c);
  }
  const Candidate* pick = nullptr;
  for (const Candidate* c : tied) {
    bool dominated = false;
    for (const Candidate* o : tied) {
      dominated = dominated ||
                  (o->x >= c->x && o->y >= c->y && (o->x > c->x || o->y > c->y));
    }
    if (dominated) continue;
    if (pick == nullptr || c->row->rates < pick->row->rates) pick = c;
  }
  return *pick->row;
}

}  // namespace mte
