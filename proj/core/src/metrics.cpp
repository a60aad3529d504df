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

#include "mte/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "mte/errors.hpp"
#include "parallel.hpp"
#include "sparse_solve.hpp"

namespace mte {
namespace {

using json = nlohmann::json;

std::size_t FindCommodity(const Instance& instance, std::size_t stratum,
                          NodeIndex destination) {
  const auto& cs = instance.commodities();
  for (std::size_t k = 0; k < cs.size(); ++k) {
    if (cs[k].stratum == stratum && cs[k].destination == destination) return k;
  }
  throw ValidationError("destination", "stratum has no demand towards this destination");
}

void CheckSolution(const Instance& instance, const EquilibriumSolution& solution) {
  if (solution.commodities.size() != instance.commodities().size() ||
      solution.total_flow.size() != instance.network().num_arcs()) {
    throw ValidationError("solution", "solution does not belong to this instance");
  }
}

json Optional(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<double> ReadOptional(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

double ReadDouble(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(key, "missing field in metrics document");
  if (it->is_null()) return std::numeric_limits<double>::quiet_NaN();
  return it->get<double>();
}

std::string Num(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string Num(const std::optional<double>& v) { return v ? Num(*v) : ""; }

std::uint64_t Mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// splitmix64 stream; fully specified so draws are identical across
// standard libraries.
class TripRng {
 public:
  explicit TripRng(std::uint64_t seed) : state_(seed) {}
  double Uniform() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  }

 private:
  std::uint64_t state_;
};

// Ratio estimator sum(w a) / sum(w b) with its delta-method standard error.
struct RatioAccumulator {
  std::vector<std::pair<double, double>> wa_wb;
  std::vector<double> w;
  void Add(double weight, double a, double b) {
    wa_wb.emplace_back(a, b);
    w.push_back(weight);
  }
  Estimate Get() const {
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      num += w[k] * wa_wb[k].first;
      den += w[k] * wa_wb[k].second;
    }
    Estimate e;
    if (den <= 0.0) {
      e.value = std::numeric_limits<double>::quiet_NaN();
      e.std_error = std::numeric_limits<double>::quiet_NaN();
      return e;
    }
    e.value = num / den;
    double var = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double r = wa_wb[k].first - e.value * wa_wb[k].second;
      var += w[k] * w[k] * r * r;
    }
    e.std_error = std::sqrt(var) / den;
    return e;
  }
};

}  // namespace

ChainExpectations ExpectedChainStats(const Instance& instance, const ExpandedPrices& prices,
                                     const EquilibriumSolution& solution,
                                     std::size_t commodity) {
  CheckSolution(instance, solution);
  if (commodity >= solution.commodities.size()) {
    throw ValidationError("commodity", "index out of range");
  }
  const Network& net = instance.network();
  const CommoditySolution& sub = solution.commodities[commodity];
  const std::size_t n = net.num_nodes();
  std::vector<double> bt(n, 0.0), bm(n, 0.0), bd(n, 0.0), bp(n, 0.0);
  for (ArcIndex a = 0; a < net.num_arcs(); ++a) {
    const NodeIndex i = net.tail(a);
    if (i == sub.destination) continue;
    const double p = sub.arc_prob[a];
    const Arc& arc = net.arc(a);
    bt[i] += p * solution.arc_time[a];
    bm[i] += p * MonetaryCost(arc, prices.rate(sub.stratum, a));
    bd[i] += p * arc.length_km;
    if (arc.is_primary()) bp[i] += p * arc.length_km;
  }
  internal::ChainSolver chain(net, sub.destination, sub.arc_prob);
  ChainExpectations out;
  out.time = chain.SolveExpectation(bt);
  out.money = chain.SolveExpectation(bm);
  out.distance_km = chain.SolveExpectation(bd);
  out.primary_km = chain.SolveExpectation(bp);
  return out;
}

std::vector<TripStats> ExpectedTripStats(const Instance& instance,
                                         const ExpandedPrices& prices,
                                         const EquilibriumSolution& solution,
                                         std::size_t stratum, NodeIndex destination) {
  const std::size_t k = FindCommodity(instance, stratum, destination);
  const ChainExpectations e = ExpectedChainStats(instance, prices, solution, k);
  const CommoditySolution& sub = solution.commodities[k];
  std::vector<TripStats> rows;
  for (std::size_t r : instance.commodities()[k].rows) {
    const OdDemand& od = instance.od_demand()[r];
    TripStats t;
    t.stratum = stratum;
    t.origin = od.origin;
    t.destination = destination;
    t.trips = od.trips;
    t.expected_time = e.time[od.origin];
    t.expected_money = e.money[od.origin];
    t.expected_distance_km = e.distance_km[od.origin];
    t.expected_primary_km = e.primary_km[od.origin];
    t.start_prob = 1.0 - sub.outside_prob[od.origin];
    rows.push_back(t);
  }
  return rows;
}

std::vector<TripStats> AllTripStats(const Instance& instance, const ExpandedPrices& prices,
                                    const EquilibriumSolution& solution) {
  CheckSolution(instance, solution);
  std::vector<TripStats> out(instance.od_demand().size());
  for (std::size_t k = 0; k < instance.commodities().size(); ++k) {
    const Commodity& c = instance.commodities()[k];
    const auto rows = ExpectedTripStats(instance, prices, solution, c.stratum, c.destination);
    for (std::size_t j = 0; j < c.rows.size(); ++j) out[c.rows[j]] = rows[j];
  }
  return out;
}

WelfareValue Welfare(const Instance& instance, const std::vector<TripStats>& priced,
                     const std::vector<TripStats>& baseline, std::size_t stratum) {
  const auto& rows = instance.od_demand();
  if (priced.size() != rows.size() || baseline.size() != rows.size()) {
    throw ValidationError("welfare", "trip statistics do not match the instance");
  }
  const std::vector<double> outside = OutsideCosts(instance);
  const Stratum& st = instance.strata().at(stratum);
  double sum = 0.0, sum0 = 0.0;
  std::size_t pairs = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].stratum != stratum) continue;
    const TripStats& p = priced[r];
    const TripStats& b = baseline[r];
    if (p.origin != rows[r].origin || b.origin != rows[r].origin) {
      throw ValidationError("welfare", "trip statistics are not in demand order");
    }
    const double t0 = b.expected_time;
    const double out_p = 1.0 - p.start_prob;
    const double out_0 = 1.0 - b.start_prob;
    sum += (t0 - p.expected_time - st.price_weight() * p.expected_money) * (1.0 - out_p) +
           (t0 - outside[r]) * out_p;
    sum0 += (t0 - b.expected_time - st.price_weight() * b.expected_money) * (1.0 - out_0) +
            (t0 - outside[r]) * out_0;
    ++pairs;
  }
  WelfareValue w;
  if (pairs == 0) return w;
  w.welfare = sum / static_cast<double>(pairs);
  w.delta = w.welfare - sum0 / static_cast<double>(pairs);
  return w;
}

double TotalWelfare(const std::vector<double>& per_stratum) {
  double total = 0.0;
  for (double w : per_stratum) total += w;
  return total;
}

double Revenue(const Instance& instance, const ExpandedPrices& prices,
               const EquilibriumSolution& solution, std::size_t stratum) {
  CheckSolution(instance, solution);
  const Network& net = instance.network();
  double r = 0.0;
  for (ArcIndex a = 0; a < net.num_arcs(); ++a) {
    r += solution.stratum_flow.at(stratum)[a] * MonetaryCost(net.arc(a), prices.rate(stratum, a));
  }
  return r;
}

double TotalRevenue(const Instance& instance, const ExpandedPrices& prices,
                    const EquilibriumSolution& solution) {
  double r = 0.0;
  for (std::size_t s = 0; s < instance.strata().size(); ++s) {
    r += Revenue(instance, prices, solution, s);
  }
  return r;
}

std::optional<double> PrimaryFlowShare(const Instance& instance,
                                       const EquilibriumSolution& solution,
                                       std::size_t stratum, bool count_weighted) {
  CheckSolution(instance, solution);
  const Network& net = instance.network();
  double primary = 0.0, total = 0.0;
  for (ArcIndex a = 0; a < net.num_arcs(); ++a) {
    const double w = solution.stratum_flow.at(stratum)[a] *
                     (count_weighted ? 1.0 : net.arc(a).length_km);
    total += w;
    if (net.arc(a).is_primary()) primary += w;
  }
  if (!(total > 0.0)) return std::nullopt;
  return primary / total;
}

MetricsReport ComputeMetrics(const Instance& instance, const ExpandedPrices& prices,
                             const EquilibriumSolution& solution,
                             const EquilibriumSolution& baseline) {
  CheckSolution(instance, solution);
  CheckSolution(instance, baseline);
  const Network& net = instance.network();
  const std::vector<TripStats> stats = AllTripStats(instance, prices, solution);
  const std::vector<TripStats> base_stats =
      AllTripStats(instance, ZeroPrices(instance), baseline);

  MetricsReport report;
  report.od = stats;
  double all_primary = 0.0, all_distance = 0.0, all_time = 0.0;
  for (std::size_t s = 0; s < instance.strata().size(); ++s) {
    StratumMetrics m;
    m.name = instance.strata()[s].name;
    const WelfareValue w = Welfare(instance, stats, base_stats, s);
    m.welfare = w.welfare;
    m.welfare_delta = w.delta;
    m.revenue = Revenue(instance, prices, solution, s);
    m.primary_share = PrimaryFlowShare(instance, solution, s);
    m.primary_share_count = PrimaryFlowShare(instance, solution, s, true);

    double distance = 0.0, time = 0.0, primary = 0.0;
    for (ArcIndex a = 0; a < net.num_arcs(); ++a) {
      const double f = solution.stratum_flow[s][a];
      distance += f * net.arc(a).length_km;
      time += f * instance.ToHours(solution.arc_time[a]);
      if (net.arc(a).is_primary()) primary += f * net.arc(a).length_km;
    }
    if (time > 0.0) m.average_speed_kmh = distance / time;
    all_primary += primary;
    all_distance += distance;
    all_time += time;

    double speed_sum = 0.0, time_sum = 0.0, weight = 0.0;
    for (std::size_t r = 0; r < stats.size(); ++r) {
      if (stats[r].stratum != s) continue;
      const double y = stats[r].trips * stats[r].start_prob;
      m.trips += stats[r].trips;
      m.trips_started += y;
      const double hours = instance.ToHours(stats[r].expected_time);
      if (y > 0.0 && hours > 0.0) {
        speed_sum += y * stats[r].expected_distance_km / hours;
        time_sum += y * stats[r].expected_time;
        weight += y;
      }
    }
    if (weight > 0.0) {
      m.trip_mean_speed_kmh = speed_sum / weight;
      m.mean_trip_time = time_sum / weight;
    }
    m.started_share = m.trips > 0.0 ? m.trips_started / m.trips : 0.0;

    report.total_welfare += m.welfare;
    report.total_welfare_delta += m.welfare_delta;
    report.total_revenue += m.revenue;
    report.trips += m.trips;
    report.trips_started += m.trips_started;
    report.strata.push_back(std::move(m));
  }
  report.started_share = report.trips > 0.0 ? report.trips_started / report.trips : 0.0;
  if (all_distance > 0.0) report.primary_share = all_primary / all_distance;
  if (all_time > 0.0) report.average_speed_kmh = all_distance / all_time;
  return report;
}

std::string MetricsToJson(const Instance& instance, const MetricsReport& report) {
  json strata = json::array();
  for (const StratumMetrics& m : report.strata) {
    strata.push_back({{"name", m.name},
                      {"welfare", m.welfare},
                      {"welfare_delta", m.welfare_delta},
                      {"revenue", m.revenue},
                      {"trips", m.trips},
                      {"trips_started", m.trips_started},
                      {"started_share", m.started_share},
                      {"primary_share", Optional(m.primary_share)},
                      {"primary_share_count", Optional(m.primary_share_count)},
                      {"average_speed_kmh", Optional(m.average_speed_kmh)},
                      {"trip_mean_speed_kmh", Optional(m.trip_mean_speed_kmh)},
                      {"mean_trip_time", Optional(m.mean_trip_time)}});
  }
  json od = json::array();
  const Network& net = instance.network();
  for (const TripStats& t : report.od) {
    od.push_back({{"stratum", instance.strata().at(t.stratum).name},
                  {"origin", net.node(t.origin).id},
                  {"destination", net.node(t.destination).id},
                  {"trips", t.trips},
                  {"expected_time", t.expected_time},
                  {"expected_money", t.expected_money},
                  {"expected_distance_km", t.expected_distance_km},
                  {"expected_primary_km", t.expected_primary_km},
                  {"start_prob", t.start_prob}});
  }
  json doc = {{"provenance", report.provenance},
              {"seed", report.seed},
              {"runs", report.runs},
              {"time_unit", TimeUnitName(instance.defaults().time_unit)},
              {"total_welfare", report.total_welfare},
              {"total_welfare_delta", report.total_welfare_delta},
              {"total_revenue", report.total_revenue},
              {"trips", report.trips},
              {"trips_started", report.trips_started},
              {"started_share", report.started_share},
              {"primary_share", Optional(report.primary_share)},
              {"average_speed_kmh", Optional(report.average_speed_kmh)},
              {"strata", std::move(strata)},
              {"od", std::move(od)}};
  return doc.dump(2) + "\n";
}

MetricsReport MetricsFromJson(const Instance& instance, const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError("metrics", std::string("malformed JSON: ") + e.what());
  }
  try {
    MetricsReport r;
    r.provenance = doc.at("provenance").get<std::string>();
    r.seed = doc.at("seed").get<std::uint64_t>();
    r.runs = doc.at("runs").get<int>();
    r.total_welfare = ReadDouble(doc, "total_welfare");
    r.total_welfare_delta = ReadDouble(doc, "total_welfare_delta");
    r.total_revenue = ReadDouble(doc, "total_revenue");
    r.trips = ReadDouble(doc, "trips");
    r.trips_started = ReadDouble(doc, "trips_started");
    r.started_share = ReadDouble(doc, "started_share");
    r.primary_share = ReadOptional(doc, "primary_share");
    r.average_speed_kmh = ReadOptional(doc, "average_speed_kmh");
    for (const json& s : doc.at("strata")) {
      StratumMetrics m;
      m.name = s.at("name").get<std::string>();
      m.welfare = ReadDouble(s, "welfare");
      m.welfare_delta = ReadDouble(s, "welfare_delta");
      m.revenue = ReadDouble(s, "revenue");
      m.trips = ReadDouble(s, "trips");
      m.trips_started = ReadDouble(s, "trips_started");
      m.started_share = ReadDouble(s, "started_share");
      m.primary_share = ReadOptional(s, "primary_share");
      m.primary_share_count = ReadOptional(s, "primary_share_count");
      m.average_speed_kmh = ReadOptional(s, "average_speed_kmh");
      m.trip_mean_speed_kmh = ReadOptional(s, "trip_mean_speed_kmh");
      m.mean_trip_time = ReadOptional(s, "mean_trip_time");
      r.strata.push_back(std::move(m));
    }
    const Network& net = instance.network();
    for (const json& o : doc.at("od")) {
      TripStats t;
      t.stratum = instance.stratum_index(o.at("stratum").get<std::string>());
      t.origin = net.node_index(o.at("origin").get<std::string>());
      t.destination = net.node_index(o.at("destination").get<std::string>());
      t.trips = ReadDouble(o, "trips");
      t.expected_time = ReadDouble(o, "expected_time");
      t.expected_money = ReadDouble(o, "expected_money");
      t.expected_distance_km = ReadDouble(o, "expected_distance_km");
      t.expected_primary_km = ReadDouble(o, "expected_primary_km");
      t.start_prob = ReadDouble(o, "start_prob");
      r.od.push_back(t);
    }
    return r;
  } catch (const json::exception& e) {
    throw ValidationError("metrics", std::string("bad metrics document: ") + e.what());
  }
}

std::string MetricsToCsv(const Instance& instance, const MetricsReport& report,
                         const std::string& scheme_id) {
  std::ostringstream out;
  out << "level,scheme,stratum,origin,destination,trips,trips_started,started_share,"
         "welfare,welfare_delta,revenue,primary_share,primary_share_count,"
         "average_speed_kmh,trip_mean_speed_kmh,mean_trip_time,expected_time,"
         "expected_money,expected_distance_km\n";
  for (const StratumMetrics& m : report.strata) {
    out << "stratum," << scheme_id << "," << m.name << ",,," << Num(m.trips) << ","
        << Num(m.trips_started) << "," << Num(m.started_share) << "," << Num(m.welfare)
        << "," << Num(m.welfare_delta) << "," << Num(m.revenue) << ","
        << Num(m.primary_share) << "," << Num(m.primary_share_count) << ","
        << Num(m.average_speed_kmh) << "," << Num(m.trip_mean_speed_kmh) << ","
        << Num(m.mean_trip_time) << ",,,\n";
  }
  const Network& net = instance.network();
  for (const TripStats& t : report.od) {
    out << "od," << scheme_id << "," << instance.strata().at(t.stratum).name << ","
        << net.node(t.origin).id << "," << net.node(t.destination).id << ","
        << Num(t.trips) << "," << Num(t.trips * t.start_prob) << "," << Num(t.start_prob)
        << ",,,,,,,,," << Num(t.expected_time) << "," << Num(t.expected_money) << ","
        << Num(t.expected_distance_km) << "\n";
  }
  return out.str();
}

std::uint64_t TripSeed(std::uint64_t seed, std::uint64_t stratum, std::uint64_t origin,
                       std::uint64_t destination, std::uint64_t replicate) {
  std::uint64_t h = Mix(seed);
  h = Mix(h ^ stratum);
  h = Mix(h ^ origin);
  h = Mix(h ^ destination);
  return Mix(h ^ replicate);
}

SimulationReport SimulateTrips(const Instance& instance, const ExpandedPrices& prices,
                               const EquilibriumSolution& solution,
                               const SimulationOptions& options) {
  CheckSolution(instance, solution);
  if (options.runs_per_unit < 1) throw ValidationError("runs", "must be >= 1");
  const Network& net = instance.network();
  SimulationReport report;
  report.options = options;
  report.step_cap = options.step_cap == 0 ? 50 * net.num_nodes() : options.step_cap;
  if (report.step_cap <= net.num_nodes()) {
    throw ValidationError("step_cap", "must exceed the number of nodes");
  }
  const auto& rows = instance.od_demand();
  std::vector<std::size_t> row_commodity(rows.size());
  for (std::size_t k = 0; k < instance.commodities().size(); ++k) {
    for (std::size_t r : instance.commodities()[k].rows) row_commodity[r] = k;
  }

  std::vector<std::vector<SimulatedTrip>> per_row(rows.size());
  internal::ParallelFor(rows.size(), options.workers, [&](std::size_t r) {
    const OdDemand& od = rows[r];
    const CommoditySolution& sub = solution.commodities[row_commodity[r]];
    const auto units = static_cast<std::size_t>(std::max(1.0, std::round(od.trips)));
    const std::size_t n = units * static_cast<std::size_t>(options.runs_per_unit);
    const double weight = od.trips / static_cast<double>(n);
    const double start = 1.0 - sub.outside_prob[od.origin];
    auto& trips = per_row[r];
    trips.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      SimulatedTrip& trip = trips[k];
      trip.row = r;
      trip.replicate = static_cast<std::uint32_t>(k);
      trip.weight = weight;
      TripRng rng(TripSeed(options.seed, od.stratum, od.origin, od.destination, k));
      trip.started = rng.Uniform() < start;
      if (!trip.started) continue;
      NodeIndex node = od.origin;
      std::size_t steps = 0;
      while (node != od.destination && steps < report.step_cap) {
        const auto out = net.out_arcs(node);
        const double u = rng.Uniform();
        double acc = 0.0;
        ArcIndex chosen = out.back();
        for (ArcIndex a : out) {
          acc += sub.arc_prob[a];
          if (u < acc) {
            chosen = a;
            break;
          }
        }
        const Arc& arc = net.arc(chosen);
        trip.time += solution.arc_time[chosen];
        trip.money += MonetaryCost(arc, prices.rate(od.stratum, chosen));
        trip.distance_km += arc.length_km;
        if (arc.is_primary()) trip.primary_km += arc.length_km;
        if (options.keep_paths) trip.arcs.push_back(chosen);
        node = net.head(chosen);
        ++steps;
      }
      trip.truncated = node != od.destination;
    }
  });

  const std::size_t num_strata = instance.strata().size();
  std::vector<RatioAccumulator> started(num_strata), time(num_strata), money(num_strata),
      primary(num_strata), speed(num_strata);
  report.strata.assign(num_strata, StratumSimulation{});
  MetricsReport& m = report.metrics;
  m.provenance = "simulated";
  m.seed = options.seed;
  m.runs = options.runs_per_unit;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  m.strata.resize(num_strata);
  std::vector<double> revenue(num_strata, 0.0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t s = rows[r].stratum;
    StratumSimulation& agg = report.strata[s];
    for (SimulatedTrip& trip : per_row[r]) {
      ++agg.samples;
      started[s].Add(trip.weight, trip.started ? 1.0 : 0.0, 1.0);
      if (trip.started) ++agg.started;
      if (trip.truncated) ++agg.truncated;
      if (trip.started && !trip.truncated) {
        time[s].Add(trip.weight, trip.time, 1.0);
        money[s].Add(trip.weight, trip.money, 1.0);
        primary[s].Add(trip.weight, trip.primary_km, trip.distance_km);
        speed[s].Add(trip.weight, trip.distance_km, instance.ToHours(trip.time));
        revenue[s] += trip.weight * trip.money;
      }
      if (options.keep_paths) report.trips.push_back(std::move(trip));
    }
  }
  auto opt = [](const Estimate& e) -> std::optional<double> {
    if (std::isnan(e.value)) return std::nullopt;
    return e.value;
  };
  for (std::size_t s = 0; s < num_strata; ++s) {
    StratumSimulation& agg = report.strata[s];
    agg.started_share = started[s].Get();
    agg.mean_time = time[s].Get();
    agg.mean_money = money[s].Get();
    agg.primary_share = primary[s].Get();
    agg.average_speed_kmh = speed[s].Get();
    StratumMetrics& sm = m.strata[s];
    sm.name = instance.strata()[s].name;
    sm.welfare = nan;
    sm.welfare_delta = nan;
    sm.revenue = revenue[s];
    for (const OdDemand& od : rows) {
      if (od.stratum == s) sm.trips += od.trips;
    }
    sm.started_share = std::isnan(agg.started_share.value) ? 0.0 : agg.started_share.value;
    sm.trips_started = sm.trips * sm.started_share;
    sm.primary_share = opt(agg.primary_share);
    sm.average_speed_kmh = opt(agg.average_speed_kmh);
    sm.mean_trip_time = opt(agg.mean_time);
    m.total_revenue += sm.revenue;
    m.trips += sm.trips;
    m.trips_started += sm.trips_started;
  }
  m.total_welfare = nan;
  m.total_welfare_delta = nan;
  m.started_share = m.trips > 0.0 ? m.trips_started / m.trips : 0.0;
  return report;
}

}  // namespace mte
