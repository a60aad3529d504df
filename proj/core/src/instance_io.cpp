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

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mte/errors.hpp"
#include "mte/instance.hpp"

namespace mte {
namespace {

using json = nlohmann::json;

const json& Require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw ValidationError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ValidationError(path + "." + key, "missing required field");
  }
  return *it;
}

double AsNumber(const json& v, const std::string& path) {
  if (!v.is_number()) throw ValidationError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ValidationError(path, "must be finite");
  return d;
}

double Number(const json& obj, const char* key, const std::string& path) {
  return AsNumber(Require(obj, key, path), path + "." + key);
}

double NumberOr(const json& obj, const char* key, const std::string& path,
                double fallback) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  return AsNumber(*it, path + "." + key);
}

int IntOr(const json& obj, const char* key, const std::string& path, int fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number_integer()) {
    throw ValidationError(path + "." + key, "expected an integer");
  }
  return it->get<int>();
}

// Node ids may be written as strings or integers.
std::string Id(const json& v, const std::string& path) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw ValidationError(path, "expected a string or integer id");
}

std::string String(const json& obj, const char* key, const std::string& path) {
  const json& v = Require(obj, key, path);
  if (!v.is_string()) throw ValidationError(path + "." + key, "expected a string");
  return v.get<std::string>();
}

const json& Array(const json& obj, const char* key, const std::string& path) {
  const json& v = Require(obj, key, path);
  if (!v.is_array()) throw ValidationError(path + "." + key, "expected an array");
  return v;
}

std::string Where(const char* section, std::size_t i) {
  return std::string(section) + "[" + std::to_string(i) + "]";
}

// Fills capacity/free time of an arc from its physical attributes.
void Finish(Arc& arc, const InstanceDefaults& defaults, const std::string& path,
            std::optional<double> capacity) {
  if (!(arc.length_km > 0.0)) throw ValidationError(path + ".length_km", "must be > 0");
  if (!(arc.free_speed_kmh > 0.0)) {
    throw ValidationError(path + ".free_speed_kmh", "must be > 0");
  }
  if (arc.lanes < 1) throw ValidationError(path + ".lanes", "must be >= 1");
  arc.free_time = arc.length_km / arc.free_speed_kmh * UnitsPerHour(defaults.time_unit);
  arc.capacity = capacity ? *capacity
                          : DefaultCapacity(arc.lanes, arc.length_km,
                                            defaults.car_length_km);
}

RoadClass ParseClassAt(const std::string& name, const std::string& path) {
  try {
    return ParseRoadClass(name);
  } catch (const ValidationError& e) {
    throw ValidationError(path, e.what());
  }
}

Arc ParseArc(const json& a, const InstanceDefaults& defaults, const std::string& where) {
  Arc arc;
  arc.id = Id(Require(a, "id", where), where + ".id");
  arc.tail = Id(Require(a, "tail", where), where + ".tail");
  arc.head = Id(Require(a, "head", where), where + ".head");
  arc.length_km = Number(a, "length_km", where);
  arc.free_speed_kmh = Number(a, "free_speed_kmh", where);
  arc.lanes = IntOr(a, "lanes", where, 1);
  arc.road_class = ParseClassAt(String(a, "road_class", where), where + ".road_class");
  arc.bpr_gamma = NumberOr(a, "bpr_gamma", where, defaults.bpr_gamma);
  arc.bpr_nu = NumberOr(a, "bpr_nu", where, defaults.bpr_nu);
  std::optional<double> capacity;
  if (a.contains("capacity") && !a["capacity"].is_null()) {
    capacity = Number(a, "capacity", where);
  }
  Finish(arc, defaults, where, capacity);
  return arc;
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    std::size_t start = cell.find_first_not_of(' ');
    out.push_back(start == std::string::npos ? "" : cell.substr(start));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

// Rows of a CSV file keyed by header name.
std::vector<std::vector<std::pair<std::string, std::string>>> ReadCsv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError(path.string(), "cannot open file");
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path.string(), "empty file");
  const auto header = SplitCsv(line);
  std::vector<std::vector<std::pair<std::string, std::string>>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto cells = SplitCsv(line);
    if (cells.size() > header.size()) {
      throw ValidationError(path.string() + ":" + std::to_string(rows.size() + 2),
                            "too many fields");
    }
    std::vector<std::pair<std::string, std::string>> row;
    for (std::size_t k = 0; k < cells.size(); ++k) row.emplace_back(header[k], cells[k]);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::optional<std::string> Field(
    const std::vector<std::pair<std::string, std::string>>& row, const std::string& key) {
  for (const auto& [k, v] : row) {
    if (k == key) {
      if (v.empty()) return std::nullopt;
      return v;
    }
  }
  return std::nullopt;
}

double ParseDouble(const std::string& text, const std::string& path) {
  try {
    std::size_t used = 0;
    const double d = std::stod(text, &used);
    if (used != text.size() || !std::isfinite(d)) throw std::invalid_argument(text);
    return d;
  } catch (const std::exception&) {
    throw ValidationError(path, "expected a number, got \"" + text + "\"");
  }
}

std::string NeedField(const std::vector<std::pair<std::string, std::string>>& row,
                      const std::string& key, const std::string& path) {
  auto v = Field(row, key);
  if (!v) throw ValidationError(path + "." + key, "missing required field");
  return *v;
}

}  // namespace

Network LoadNetworkCsv(const std::filesystem::path& nodes_csv,
                       const std::filesystem::path& arcs_csv,
                       const InstanceDefaults& defaults) {
  std::vector<Node> nodes;
  const auto node_rows = ReadCsv(nodes_csv);
  for (std::size_t i = 0; i < node_rows.size(); ++i) {
    const std::string where = nodes_csv.filename().string() + "[" + std::to_string(i) + "]";
    Node n;
    n.id = NeedField(node_rows[i], "id", where);
    n.x = ParseDouble(NeedField(node_rows[i], "x", where), where + ".x");
    n.y = ParseDouble(NeedField(node_rows[i], "y", where), where + ".y");
    nodes.push_back(std::move(n));
  }
  std::vector<Arc> arcs;
  const auto arc_rows = ReadCsv(arcs_csv);
  for (std::size_t i = 0; i < arc_rows.size(); ++i) {
    const auto& row = arc_rows[i];
    const std::string where = arcs_csv.filename().string() + "[" + std::to_string(i) + "]";
    auto num = [&](const std::string& key) {
      return ParseDouble(NeedField(row, key, where), where + "." + key);
    };
    auto opt = [&](const std::string& key, double fallback) {
      auto v = Field(row, key);
      return v ? ParseDouble(*v, where + "." + key) : fallback;
    };
    Arc arc;
    arc.id = NeedField(row, "id", where);
    arc.tail = NeedField(row, "tail", where);
    arc.head = NeedField(row, "head", where);
    arc.length_km = num("length_km");
    arc.free_speed_kmh = num("free_speed_kmh");
    const double lanes = opt("lanes", 1.0);
    if (lanes != std::floor(lanes)) throw ValidationError(where + ".lanes", "expected an integer");
    arc.lanes = static_cast<int>(lanes);
    arc.road_class = ParseClassAt(NeedField(row, "road_class", where), where + ".road_class");
    arc.bpr_gamma = opt("bpr_gamma", defaults.bpr_gamma);
    arc.bpr_nu = opt("bpr_nu", defaults.bpr_nu);
    std::optional<double> capacity;
    if (auto c = Field(row, "capacity")) capacity = ParseDouble(*c, where + ".capacity");
    Finish(arc, defaults, where, capacity);
    arcs.push_back(std::move(arc));
  }
  return Network::Build(std::move(nodes), std::move(arcs));
}

Instance ParseInstance(std::string_view json_text, const std::filesystem::path& base_dir,
                       const InstanceLoadOptions& options) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError("", std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("", "instance document must be an object");

  InstanceDefaults defaults;
  if (doc.contains("defaults")) {
    const json& d = doc["defaults"];
    if (!d.is_object()) throw ValidationError("defaults", "expected an object");
    defaults.car_length_km = NumberOr(d, "car_length_km", "defaults", defaults.car_length_km);
    defaults.bpr_gamma = NumberOr(d, "bpr_gamma", "defaults", defaults.bpr_gamma);
    defaults.bpr_nu = NumberOr(d, "bpr_nu", "defaults", defaults.bpr_nu);
    if (d.contains("time_unit")) {
      defaults.time_unit = ParseTimeUnit(String(d, "time_unit", "defaults"));
    }
  }
  if (!(defaults.car_length_km > 0.0)) {
    throw ValidationError("defaults.car_length_km", "must be > 0");
  }

  Network network;
  if (doc.contains("network_csv")) {
    if (doc.contains("nodes") || doc.contains("arcs")) {
      throw ValidationError("network_csv", "give either nodes/arcs or network_csv, not both");
    }
    const json& files = doc["network_csv"];
    network = LoadNetworkCsv(base_dir / String(files, "nodes", "network_csv"),
                             base_dir / String(files, "arcs", "network_csv"), defaults);
  } else {
    std::vector<Node> nodes;
    const json& jn = Array(doc, "nodes", "");
    for (std::size_t i = 0; i < jn.size(); ++i) {
      const std::string where = Where("nodes", i);
      Node n;
      n.id = Id(Require(jn[i], "id", where), where + ".id");
      n.x = Number(jn[i], "x", where);
      n.y = Number(jn[i], "y", where);
      nodes.push_back(std::move(n));
    }
    std::vector<Arc> arcs;
    const json& ja = Array(doc, "arcs", "");
    for (std::size_t i = 0; i < ja.size(); ++i) {
      arcs.push_back(ParseArc(ja[i], defaults, Where("arcs", i)));
    }
    network = Network::Build(std::move(nodes), std::move(arcs));
  }

  std::vector<Stratum> strata;
  const json& js = Array(doc, "strata", "");
  for (std::size_t i = 0; i < js.size(); ++i) {
    const json& s = js[i];
    std::string where = Where("strata", i);
    Stratum st;
    st.name = String(s, "name", where);
    where += " (" + st.name + ")";
    st.beta_time = Number(s, "beta_t", where);
    st.beta_price = Number(s, "beta_p", where);
    st.outside_beta_time = NumberOr(s, "beta_t_out", where, st.beta_time);
    st.outside_beta_price = NumberOr(s, "beta_p_out", where, st.beta_price);
    strata.push_back(std::move(st));
  }

  std::vector<DemandEntry> demand;
  const json& jd = Array(doc, "demand", "");
  for (std::size_t i = 0; i < jd.size(); ++i) {
    const std::string where = Where("demand", i);
    DemandEntry e;
    e.stratum = String(jd[i], "stratum", where);
    e.origin = Id(Require(jd[i], "origin", where), where + ".origin");
    e.destination = Id(Require(jd[i], "destination", where), where + ".destination");
    e.trips = Number(jd[i], "trips", where);
    demand.push_back(std::move(e));
  }

  OutsideOption outside;
  if (doc.contains("outside_option")) {
    const json& o = doc["outside_option"];
    if (!o.is_object()) throw ValidationError("outside_option", "expected an object");
    if (o.contains("mode")) {
      const std::string mode = String(o, "mode", "outside_option");
      if (mode == "per_od_table") {
        outside.mode = OutsideMode::kPerOdTable;
      } else if (mode == "free_time_multiplier") {
        outside.mode = OutsideMode::kFreeTimeMultiplier;
      } else {
        throw ValidationError("outside_option.mode", "unknown mode \"" + mode + "\"");
      }
    }
    outside.multiplier = NumberOr(o, "multiplier", "outside_option", outside.multiplier);
    outside.ticket = NumberOr(o, "ticket", "outside_option", outside.ticket);
    if (o.contains("table")) {
      const json& jt = Array(o, "table", "outside_option");
      for (std::size_t i = 0; i < jt.size(); ++i) {
        const std::string where = "outside_option." + Where("table", i);
        OutsideOdEntry e;
        e.origin = Id(Require(jt[i], "origin", where), where + ".origin");
        e.destination = Id(Require(jt[i], "destination", where), where + ".destination");
        if (jt[i].contains("time")) e.time = Number(jt[i], "time", where);
        if (jt[i].contains("ticket")) e.ticket = Number(jt[i], "ticket", where);
        outside.table.push_back(std::move(e));
      }
    }
  }

  SolverOptions solver;
  if (doc.contains("solver")) {
    const json& s = doc["solver"];
    if (!s.is_object()) throw ValidationError("solver", "expected an object");
    solver.inner_tol = NumberOr(s, "inner_tol", "solver", solver.inner_tol);
    solver.inner_max_iters = IntOr(s, "inner_max_iters", "solver", solver.inner_max_iters);
    solver.outer_tol = NumberOr(s, "outer_tol", "solver", solver.outer_tol);
    solver.outer_max_iters = IntOr(s, "outer_max_iters", "solver", solver.outer_max_iters);
    solver.divergence_guard =
        NumberOr(s, "divergence_guard", "solver", solver.divergence_guard);
    solver.divergence_window =
        IntOr(s, "divergence_window", "solver", solver.divergence_window);
    solver.workers = IntOr(s, "workers", "solver", solver.workers);
    if (s.contains("step_rule")) {
      solver.step_rule = ParseStepRule(String(s, "step_rule", "solver"));
    }
  }

  if (options.extract_core) {
    const std::size_t before_nodes = network.num_nodes();
    const std::size_t before_arcs = network.num_arcs();
    network = ExtractCore(network);
    auto note = [&](const std::string& msg) {
      if (options.warnings) options.warnings->push_back(msg);
    };
    if (network.num_nodes() != before_nodes || network.num_arcs() != before_arcs) {
      note("core keeps " + std::to_string(network.num_nodes()) + " of " +
           std::to_string(before_nodes) + " nodes and " + std::to_string(network.num_arcs()) +
           " of " + std::to_string(before_arcs) + " arcs");
    }
    std::vector<DemandEntry> kept;
    for (DemandEntry& e : demand) {
      if (network.has_node(e.origin) && network.has_node(e.destination)) {
        kept.push_back(std::move(e));
      } else {
        note("dropped demand " + e.stratum + " " + e.origin + " -> " + e.destination);
      }
    }
    demand = std::move(kept);
    std::vector<OutsideOdEntry> table;
    for (OutsideOdEntry& e : outside.table) {
      if (network.has_node(e.origin) && network.has_node(e.destination)) {
        table.push_back(std::move(e));
      } else {
        note("dropped outside-option entry " + e.origin + " -> " + e.destination);
      }
    }
    outside.table = std::move(table);
  }

  return Instance::Create(std::move(network), std::move(strata), std::move(demand),
                          std::move(outside), defaults, std::move(solver));
}

Instance LoadInstance(const std::filesystem::path& path, const InstanceLoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path.string(), "cannot open instance file");
  std::ostringstream text;
  text << in.rdbuf();
  return ParseInstance(text.str(), path.parent_path(), options);
}

std::string SerializeInstance(const Instance& instance) {
  json doc;
  doc["defaults"] = {{"car_length_km", instance.defaults().car_length_km},
                     {"bpr_gamma", instance.defaults().bpr_gamma},
                     {"bpr_nu", instance.defaults().bpr_nu},
                     {"time_unit", TimeUnitName(instance.defaults().time_unit)}};
  json nodes = json::array();
  for (const Node& n : instance.network().nodes()) {
    nodes.push_back({{"id", n.id}, {"x", n.x}, {"y", n.y}});
  }
  doc["nodes"] = std::move(nodes);
  json arcs = json::array();
  for (const Arc& a : instance.network().arcs()) {
    arcs.push_back({{"id", a.id},
                    {"tail", a.tail},
                    {"head", a.head},
                    {"length_km", a.length_km},
                    {"free_speed_kmh", a.free_speed_kmh},
                    {"lanes", a.lanes},
                    {"road_class", RoadClassName(a.road_class)},
                    {"capacity", a.capacity},
                    {"bpr_gamma", a.bpr_gamma},
                    {"bpr_nu", a.bpr_nu}});
  }
  doc["arcs"] = std::move(arcs);
  json strata = json::array();
  for (const Stratum& s : instance.strata()) {
    strata.push_back({{"name", s.name},
                      {"beta_t", s.beta_time},
                      {"beta_p", s.beta_price},
                      {"beta_t_out", s.outside_beta_time},
                      {"beta_p_out", s.outside_beta_price}});
  }
  doc["strata"] = std::move(strata);
  json demand = json::array();
  for (const DemandEntry& e : instance.demand()) {
    demand.push_back({{"stratum", e.stratum},
                      {"origin", e.origin},
                      {"destination", e.destination},
                      {"trips", e.trips}});
  }
  doc["demand"] = std::move(demand);
  const OutsideOption& o = instance.outside();
  json outside = {{"mode", o.mode == OutsideMode::kPerOdTable ? "per_od_table"
                                                              : "free_time_multiplier"},
                  {"multiplier", o.multiplier},
                  {"ticket", o.ticket}};
  if (!o.table.empty()) {
    json table = json::array();
    for (const OutsideOdEntry& e : o.table) {
      json row = {{"origin", e.origin}, {"destination", e.destination}};
      if (e.time) row["time"] = *e.time;
      if (e.ticket) row["ticket"] = *e.ticket;
      table.push_back(std::move(row));
    }
    outside["table"] = std::move(table);
  }
  doc["outside_option"] = std::move(outside);
  const SolverOptions& s = instance.solver();
  doc["solver"] = {{"inner_tol", s.inner_tol},
                   {"inner_max_iters", s.inner_max_iters},
                   {"outer_tol", s.outer_tol},
                   {"outer_max_iters", s.outer_max_iters},
                   {"step_rule", StepRuleName(s.step_rule)},
                   {"divergence_guard", s.divergence_guard},
                   {"divergence_window", s.divergence_window}};
  return doc.dump(2) + "\n";
}

void SaveInstance(const Instance& instance, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << SerializeInstance(instance);
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace mte
