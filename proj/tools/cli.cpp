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

#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mte/equilibrium.hpp"
#include "mte/errors.hpp"
#include "mte/experiments.hpp"
#include "mte/instance.hpp"
#include "mte/metrics.hpp"
#include "mte/pricing.hpp"
#include "mte/solution_io.hpp"
#include "mte/synthgen.hpp"

namespace mte::cli {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

int DefaultWorkers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

struct SolverFlags {
  std::optional<double> tol_inner;
  std::optional<double> tol_outer;
  std::optional<int> max_inner;
  std::optional<int> max_outer;
  std::optional<std::string> step_rule;

  void Attach(CLI::App* app) {
    app->add_option("--tol-inner", tol_inner, "Inner tau fixed-point tolerance");
    app->add_option("--tol-outer", tol_outer, "Outer flow tolerance (vehicles)");
    app->add_option("--max-inner", max_inner, "Inner iteration cap");
    app->add_option("--max-outer", max_outer, "Outer iteration cap");
    app->add_option("--step-rule", step_rule, "baillon, msa or adaptive");
  }

  bool any() const {
    return tol_inner || tol_outer || max_inner || max_outer || step_rule;
  }

  SolverOptions Apply(SolverOptions o) const {
    if (tol_inner) o.inner_tol = *tol_inner;
    if (tol_outer) o.outer_tol = *tol_outer;
    if (max_inner) o.inner_max_iters = *max_inner;
    if (max_outer) o.outer_max_iters = *max_outer;
    if (step_rule) o.step_rule = ParseStepRule(*step_rule);
    if (!(o.inner_tol > 0) || !(o.outer_tol > 0)) {
      throw ValidationError("solver", "tolerances must be positive");
    }
    if (o.inner_max_iters < 1 || o.outer_max_iters < 1) {
      throw ValidationError("solver", "iteration caps must be at least 1");
    }
    return o;
  }
};

struct SchemeFlags {
  std::string scheme = "uniform";
  std::optional<double> rate;
  std::optional<std::string> rates;
  std::string areas = "2x2";

  void Attach(CLI::App* app) {
    app->add_option("--scheme", scheme, "uniform, stratum or area")->capture_default_str();
    app->add_option("--rate", rate, "Uniform rate per km");
    app->add_option("--rates", rates,
                    "Comma-separated rates in stratum or area-label order, or name=value pairs");
    app->add_option("--areas", areas, "Area grid RxC")->capture_default_str();
  }
};

double ParseNumber(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ValidationError(what, "not a number: \"" + text + "\"");
  }
}

std::vector<std::string> Split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

// Builds the scheme and, for per-area pricing, the area assignment.
SchemeSpec BuildScheme(const SchemeFlags& flags, const Instance& instance,
                       std::optional<AreaAssignment>* areas) {
  SchemeSpec spec;
  spec.family = ParseSchemeFamily(flags.scheme);
  if (spec.family == SchemeFamily::kPerArea) {
    const auto [rows, cols] = ParseGridShape(flags.areas);
    *areas = AssignAreas(instance.network(), rows, cols);
  }
  if (spec.family == SchemeFamily::kUniform) {
    if (flags.rates) throw ValidationError("--rates", "use --rate with the uniform scheme");
    spec.rates = {flags.rate.value_or(0.0)};
    return spec;
  }
  if (flags.rate) throw ValidationError("--rate", "use --rates with " + flags.scheme);
  if (!flags.rates) throw ValidationError("--rates", "required for " + flags.scheme);
  const std::vector<std::string> parts = Split(*flags.rates, ',');
  const bool named = !parts.empty() && parts[0].find('=') != std::string::npos;
  if (named) {
    std::map<std::string, double> by_name;
    for (const std::string& p : parts) {
      const auto eq = p.find('=');
      if (eq == std::string::npos) throw ValidationError("--rates", "mixed name=value list");
      by_name[p.substr(0, eq)] = ParseNumber(p.substr(eq + 1), "--rates");
    }
    return spec.family == SchemeFamily::kPerStratum ? PerStratumScheme(instance, by_name)
                                                    : PerAreaScheme(**areas, by_name);
  }
  for (const std::string& p : parts) spec.rates.push_back(ParseNumber(p, "--rates"));
  return spec;
}

std::function<void(const IterationRecord&)> IterationLogger(std::ostream& err,
                                                            const std::string& phase) {
  return [&err, phase](const IterationRecord& r) {
    json line = {{"event", "outer_iteration"},
                 {"phase", phase},
                 {"iteration", r.iteration},
                 {"residual", r.residual},
                 {"step", r.step},
                 {"max_inner_iterations", r.max_inner_iterations},
                 {"wall_seconds", r.wall_seconds}};
    err << line.dump() << '\n';
  };
}

void WriteFile(const fs::path& path, const std::string& text) {
  WriteTextFileAtomic(path, text);
}

std::string StatusLine(const EquilibriumSolution& s) {
  std::ostringstream out;
  out << (s.fully_converged() ? "converged" : "NOT converged") << " after "
      << s.outer_iterations << " outer iterations, residual " << s.outer_residual
      << ", max inner residual " << s.max_inner_residual;
  return out.str();
}

// --- subcommands ---------------------------------------------------------

struct SolveArgs {
  std::string instance;
  std::string out;
  SchemeFlags scheme;
  SolverFlags solver;
  int workers = DefaultWorkers();
  bool verbose = false;
};

int RunSolve(const SolveArgs& a, std::ostream& out, std::ostream& err) {
  const Instance instance = LoadInstance(a.instance);
  std::optional<AreaAssignment> areas;
  const SchemeSpec spec = BuildScheme(a.scheme, instance, &areas);
  const ExpandedPrices prices = ExpandScheme(spec, instance, areas ? &*areas : nullptr);
  SolverOptions so = a.solver.Apply(instance.solver());
  so.workers = a.workers;

  if (a.verbose) so.on_iteration = IterationLogger(err, "priced");
  const EquilibriumSolution solution = SolveEquilibrium(instance, prices, so);
  EquilibriumSolution baseline;
  if (prices.all_zero()) {
    baseline = solution;
  } else {
    if (a.verbose) so.on_iteration = IterationLogger(err, "baseline");
    baseline = SolveEquilibrium(instance, ZeroPrices(instance), so);
  }
  const MetricsReport report = ComputeMetrics(instance, prices, solution, baseline);

  const fs::path dir(a.out);
  WriteFile(dir / "solution.json", SolutionToJson(instance, {spec, prices, solution}));
  WriteFile(dir / "metrics.json", MetricsToJson(instance, report));
  WriteFile(dir / "metrics.csv", MetricsToCsv(instance, report, spec.id()));

  out << "scheme " << spec.id() << ": " << StatusLine(solution) << '\n';
  out << "total welfare " << report.total_welfare << ", revenue " << report.total_revenue
      << '\n';
  if (!baseline.fully_converged()) err << "warning: baseline " << StatusLine(baseline) << '\n';
  return solution.fully_converged() && baseline.fully_converged() ? kExitOk
                                                                   : kExitNotConverged;
}

struct SweepArgs {
  std::string config;
  std::string instance;
  std::string out;
  std::optional<std::string> grid;
  std::optional<std::string> values;
  std::optional<std::string> order;
  SchemeFlags scheme;
  SolverFlags solver;
  std::optional<int> workers;
  std::optional<int> runs;
  std::optional<std::uint64_t> seed;
  bool simulate = false;
  bool verbose = false;
};

int RunSweepCommand(const SweepArgs& a, std::ostream& out, std::ostream& err) {
  SweepConfig config;
  if (!a.config.empty()) {
    config = LoadSweepConfig(a.config);
    if (!a.instance.empty()) config.instance_path = a.instance;
  } else {
    if (a.instance.empty()) throw ValidationError("--instance", "required without --config");
    config.instance_path = a.instance;
    config.grid.family = ParseSchemeFamily(a.scheme.scheme);
    if (a.grid) {
      const GridSpec range = ParseGridRange(*a.grid);
      config.grid.lo = range.lo;
      config.grid.hi = range.hi;
      config.grid.step = range.step;
    } else if (a.values) {
      for (const std::string& v : Split(*a.values, ',')) {
        config.grid.values.push_back(ParseNumber(v, "--values"));
      }
    } else {
      throw ValidationError("--grid", "required without --config or --values");
    }
    std::tie(config.area_rows, config.area_cols) = ParseGridShape(a.scheme.areas);
    config.workers = DefaultWorkers();
  }
  if (a.order) config.grid.order = ParseRateOrder(*a.order);
  if (!a.out.empty()) config.output = a.out;
  if (config.output.empty()) throw ValidationError("--out", "required");
  if (a.workers) config.workers = *a.workers;
  if (a.runs) config.metrics.runs = *a.runs;
  if (a.seed) config.metrics.seed = *a.seed;
  if (a.simulate) config.metrics.simulate = true;
  if (config.workers < 1) throw ValidationError("--workers", "must be >= 1");
  if (config.metrics.runs < 1) throw ValidationError("--runs", "must be >= 1");

  const Instance instance = LoadInstance(config.instance_path);
  if (a.solver.any()) config.solver = a.solver.Apply(config.solver.value_or(instance.solver()));

  std::function<void(const ResultRow&)> on_row;
  if (a.verbose) {
    on_row = [&err](const ResultRow& r) {
      err << json{{"event", "scheme_done"},
                  {"scheme_id", r.scheme_id},
                  {"converged", r.converged},
                  {"outer_iterations", r.outer_iterations},
                  {"outer_residual", r.outer_residual},
                  {"error", r.error}}
                 .dump()
          << '\n';
    };
  }
  const SweepResult result = RunSweep(config, instance, on_row);
  for (const std::string& w : result.warnings) err << "warning: " << w << '\n';
  bool all_converged = true;
  for (const ResultRow& r : result.table.rows) {
    all_converged = all_converged && r.error.empty() && r.converged && r.inner_converged;
  }
  out << result.table.rows.size() << " rows (" << result.computed << " solved, "
      << result.reused << " reused) written to " << config.output.string() << '\n';
  return all_converged ? kExitOk : kExitNotConverged;
}

struct ParetoArgs {
  std::string results;
  std::string x = "total_welfare";
  std::string y = "total_revenue";
  std::string out;
  std::optional<std::string> stratum;
  double lambda = 0.5;
  std::string mode = "welfare_vs_total_welfare";
};

int RunPareto(const ParetoArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<std::string> warnings;
  const ResultsTable table = LoadResults(a.results, &warnings);
  for (const std::string& w : warnings) err << "warning: " << w << '\n';
  const std::vector<ResultRow> frontier = ParetoFrontier(table, a.x, a.y);
  const fs::path path = a.out.empty() ? fs::path(a.results) / FrontierFileName(a.x, a.y)
                                      : fs::path(a.out);
  WriteFile(path, FrontierToCsv(table, frontier, a.x, a.y));
  out << frontier.size() << " of " << table.rows.size() << " rows on the frontier, written to "
      << path.string() << '\n';
  if (a.stratum && !table.rows.empty()) {
    ScalarizedObjective obj;
    obj.stratum = *a.stratum;
    obj.lambda = a.lambda;
    obj.mode = ParseScalarizedMode(a.mode);
    const ResultRow best = BestScalarized(table, obj);
    out << "best " << ScalarizedModeName(obj.mode) << " lambda=" << obj.lambda << ": "
        << best.scheme_id << '\n';
  }
  return kExitOk;
}

struct SimulateArgs {
  std::string instance;
  std::string solution;
  std::string out;
  SchemeFlags scheme;
  SolverFlags solver;
  int runs = 10;
  std::uint64_t seed = 0;
  int workers = DefaultWorkers();
  bool verbose = false;
};

std::string SimulationCsv(const Instance& instance, const SimulationReport& report) {
  std::ostringstream out;
  out << "stratum,samples,started,truncated,started_share,started_share_se,mean_time,"
         "mean_time_se,mean_money,mean_money_se,primary_share,primary_share_se,"
         "average_speed_kmh,average_speed_kmh_se\n";
  char buf[40];
  auto num = [&](double v) {
    if (!std::isfinite(v)) return std::string();
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (std::size_t s = 0; s < report.strata.size(); ++s) {
    const StratumSimulation& r = report.strata[s];
    out << instance.strata()[s].name << ',' << r.samples << ',' << r.started << ','
        << r.truncated << ',' << num(r.started_share.value) << ','
        << num(r.started_share.std_error) << ',' << num(r.mean_time.value) << ','
        << num(r.mean_time.std_error) << ',' << num(r.mean_money.value) << ','
        << num(r.mean_money.std_error) << ',' << num(r.primary_share.value) << ','
        << num(r.primary_share.std_error) << ',' << num(r.average_speed_kmh.value) << ','
        << num(r.average_speed_kmh.std_error) << '\n';
  }
  return out.str();
}

int RunSimulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  const Instance instance = LoadInstance(a.instance);
  StoredSolution stored;
  if (!a.solution.empty()) {
    stored = LoadSolution(instance, a.solution);
  } else {
    std::optional<AreaAssignment> areas;
    const SchemeSpec spec = BuildScheme(a.scheme, instance, &areas);
    stored.scheme = spec;
    stored.prices = ExpandScheme(spec, instance, areas ? &*areas : nullptr);
    SolverOptions so = a.solver.Apply(instance.solver());
    so.workers = a.workers;
    if (a.verbose) so.on_iteration = IterationLogger(err, "priced");
    stored.solution = SolveEquilibrium(instance, stored.prices, so);
  }
  if (a.runs < 1) throw ValidationError("--runs", "must be >= 1");
  SimulationOptions opt;
  opt.runs_per_unit = a.runs;
  opt.seed = a.seed;
  opt.workers = a.workers;
  const SimulationReport report = SimulateTrips(instance, stored.prices, stored.solution, opt);
  const fs::path dir(a.out);
  WriteFile(dir / "simulation.json", MetricsToJson(instance, report.metrics));
  WriteFile(dir / "simulation.csv", SimulationCsv(instance, report));
  std::size_t samples = 0;
  std::size_t truncated = 0;
  for (const StratumSimulation& s : report.strata) {
    samples += s.samples;
    truncated += s.truncated;
  }
  out << samples << " simulated trips (" << truncated << " truncated at "
      << report.step_cap << " steps) written to " << dir.string() << '\n';
  return stored.solution.fully_converged() ? kExitOk : kExitNotConverged;
}

struct GenerateArgs {
  std::string out;
  std::string spec;
  std::optional<int> rows;
  std::optional<int> cols;
  std::optional<std::uint64_t> seed;
  std::optional<int> pairs;
  std::optional<double> trips;
  std::optional<double> min_distance;
};

int RunGenerate(const std::string& kind, const GenerateArgs& a, std::ostream& out,
                std::ostream& err) {
  Instance instance = GenSingleOd();
  if (kind == "grid") {
    GridGenSpec spec;
    if (!a.spec.empty()) {
      const bool inline_json = a.spec.find('{') != std::string::npos;
      spec = ParseGridGenSpec(inline_json ? a.spec : ReadTextFile(a.spec));
    }
    if (a.rows) spec.rows = *a.rows;
    if (a.cols) spec.cols = *a.cols;
    if (a.seed) spec.seed = *a.seed;
    if (a.pairs) spec.pairs_per_group = *a.pairs;
    if (a.trips) spec.trips = *a.trips;
    if (a.min_distance) spec.min_distance_km = *a.min_distance;
    std::vector<std::string> warnings;
    instance = GenGrid(spec, &warnings);
    for (const std::string& w : warnings) err << "warning: " << w << '\n';
  }
  WriteFile(a.out, SerializeInstance(instance));
  out << kind << ": " << instance.network().num_nodes() << " nodes, "
      << instance.network().num_arcs() << " arcs, " << instance.od_demand().size()
      << " demand rows written to " << a.out << '\n';
  return kExitOk;
}

struct ValidateArgs {
  std::string instance;
  bool extract_core = false;
  std::string out;
};

int RunValidate(const ValidateArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<std::string> warnings;
  InstanceLoadOptions options;
  options.extract_core = a.extract_core;
  options.warnings = &warnings;
  const Instance instance = LoadInstance(a.instance, options);
  for (const std::string& w : warnings) err << "warning: " << w << '\n';
  std::size_t primary = 0;
  for (const Arc& arc : instance.network().arcs()) primary += arc.is_primary();
  out << "ok: " << instance.network().num_nodes() << " nodes, "
      << instance.network().num_arcs() << " arcs (" << primary << " primary), "
      << instance.strata().size() << " strata, " << instance.od_demand().size()
      << " demand rows, " << instance.commodities().size() << " commodities, time unit "
      << TimeUnitName(instance.defaults().time_unit) << '\n';
  if (!a.out.empty()) WriteFile(a.out, SerializeInstance(instance));
  return kExitOk;
}

}  // namespace

int Run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Traffic equilibrium and congestion-pricing experiments", "mte"};
  app.require_subcommand(1);

  SolveArgs solve;
  CLI::App* solve_cmd = app.add_subcommand("solve", "Solve one pricing scheme");
  solve_cmd->add_option("--instance", solve.instance, "Instance JSON")->required();
  solve_cmd->add_option("--out", solve.out, "Output directory")->required();
  solve.scheme.Attach(solve_cmd);
  solve.solver.Attach(solve_cmd);
  solve_cmd->add_option("--workers", solve.workers, "Worker threads");
  solve_cmd->add_flag("--verbose", solve.verbose, "Iteration log as JSON lines on stderr");
  // Accepted for a uniform surface; solve draws no random numbers.
  std::uint64_t unused_seed = 0;
  solve_cmd->add_option("--seed", unused_seed, "Random seed (unused by solve)");

  SweepArgs sweep;
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Grid search over pricing schemes");
  sweep_cmd->add_option("--config", sweep.config, "Sweep config JSON");
  sweep_cmd->add_option("--instance", sweep.instance, "Instance JSON");
  sweep_cmd->add_option("--out", sweep.out, "Results directory");
  sweep_cmd->add_option("--grid", sweep.grid, "Rate grid LO:HI:STEP");
  sweep_cmd->add_option("--values", sweep.values, "Comma-separated rate values");
  sweep_cmd->add_option("--order", sweep.order, "Per-stratum filter: nonincreasing, "
                                               "nondecreasing or any");
  sweep.scheme.Attach(sweep_cmd);
  sweep.solver.Attach(sweep_cmd);
  sweep_cmd->add_option("--workers", sweep.workers, "Worker threads");
  sweep_cmd->add_option("--runs", sweep.runs, "Simulation runs per demand unit");
  sweep_cmd->add_option("--seed", sweep.seed, "Simulation seed");
  sweep_cmd->add_flag("--simulate", sweep.simulate, "Add Monte Carlo columns");
  sweep_cmd->add_flag("--verbose", sweep.verbose, "Per-scheme JSON lines on stderr");

  ParetoArgs pareto;
  CLI::App* pareto_cmd = app.add_subcommand("pareto", "Pareto frontier of a results directory");
  pareto_cmd->add_option("--results", pareto.results, "Results directory")->required();
  pareto_cmd->add_option("--x", pareto.x, "First objective")->capture_default_str();
  pareto_cmd->add_option("--y", pareto.y, "Second objective")->capture_default_str();
  pareto_cmd->add_option("--out", pareto.out, "Frontier CSV path");
  pareto_cmd->add_option("--stratum", pareto.stratum, "Also report the scalarized optimum");
  pareto_cmd->add_option("--lambda", pareto.lambda, "Weight of the stratum welfare")
      ->capture_default_str();
  pareto_cmd->add_option("--mode", pareto.mode,
                         "welfare_vs_total_welfare or welfare_vs_revenue")
      ->capture_default_str();

  SimulateArgs sim;
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Monte Carlo trips on an equilibrium");
  sim_cmd->add_option("--instance", sim.instance, "Instance JSON")->required();
  sim_cmd->add_option("--solution", sim.solution, "solution.json from `mte solve`");
  sim_cmd->add_option("--out", sim.out, "Output directory")->required();
  sim.scheme.Attach(sim_cmd);
  sim.solver.Attach(sim_cmd);
  sim_cmd->add_option("--runs", sim.runs, "Runs per demand unit")->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
  sim_cmd->add_option("--workers", sim.workers, "Worker threads");
  sim_cmd->add_flag("--verbose", sim.verbose, "Iteration log as JSON lines on stderr");

  GenerateArgs gen;
  std::string kind;
  CLI::App* gen_cmd = app.add_subcommand("generate", "Write a synthetic instance");
  gen_cmd->add_option("kind", kind, "single-od or grid")
      ->required()
      ->check(CLI::IsMember({"single-od", "grid"}));
  gen_cmd->add_option("--out", gen.out, "Instance JSON path")->required();
  gen_cmd->add_option("--spec", gen.spec, "Grid spec as inline JSON or a file");
  gen_cmd->add_option("--rows", gen.rows, "Grid rows");
  gen_cmd->add_option("--cols", gen.cols, "Grid columns");
  gen_cmd->add_option("--seed", gen.seed, "OD sampling seed");
  gen_cmd->add_option("--pairs", gen.pairs, "OD pairs per area pair");
  gen_cmd->add_option("--trips", gen.trips, "Trips per OD pair and stratum");
  gen_cmd->add_option("--min-distance", gen.min_distance, "Minimum OD distance (km)");

  ValidateArgs val;
  CLI::App* val_cmd = app.add_subcommand("validate", "Check an instance file");
  val_cmd->add_option("--instance", val.instance, "Instance JSON")->required();
  val_cmd->add_flag("--extract-core", val.extract_core,
                    "Reduce to the largest strongly connected core first");
  val_cmd->add_option("--out", val.out, "Write the validated instance here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help requests exit 0; every usage error maps to the validation code.
    return app.exit(e, out, err) == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*solve_cmd) return RunSolve(solve, out, err);
    if (*sweep_cmd) return RunSweepCommand(sweep, out, err);
    if (*pareto_cmd) return RunPareto(pareto, out, err);
    if (*sim_cmd) return RunSimulate(sim, out, err);
    if (*gen_cmd) return RunGenerate(kind, gen, out, err);
    if (*val_cmd) return RunValidate(val, out, err);
  } catch (const InfeasibleInstanceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNotConverged;
  } catch (const SingularSystemError& e) {
    err << "error: " << e.what() << '\n';
    return kExitNotConverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitValidation;
}

}  // namespace mte::cli
