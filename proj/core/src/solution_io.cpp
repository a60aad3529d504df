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

#include "mte/solution_io.hpp"

#include <fstream>
#include <sstream>
#include <system_error>
#include <utility>

#include "json.hpp"
#include "mte/errors.hpp"

namespace mte {
namespace {

using json = nlohmann::json;

constexpr int kSolutionVersion = 1;

std::vector<double> Doubles(const json& v, std::size_t expected, const char* what) {
  auto out = v.get<std::vector<double>>();
  if (out.size() != expected) {
    throw ValidationError(what, "expected " + std::to_string(expected) + " entries");
  }
  return out;
}

}  // namespace

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError(path.string(), "cannot open file");
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

void WriteTextFileAtomic(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << text;
    out.flush();
    if (!out) throw Error("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename " + tmp.string() + ": " + ec.message());
}

std::string SolutionToJson(const Instance& instance, const StoredSolution& stored) {
  const Network& net = instance.network();
  const EquilibriumSolution& sol = stored.solution;
  json doc;
  doc["schema_version"] = kSolutionVersion;
  if (stored.scheme) {
    doc["scheme"] = {{"id", stored.scheme->id()},
                     {"family", SchemeFamilyName(stored.scheme->family)},
                     {"rates", stored.scheme->rates}};
  }
  json prices = json::object();
  for (std::size_t s = 0; s < stored.prices.num_strata(); ++s) {
    std::vector<double> row(stored.prices.num_arcs());
    for (ArcIndex a = 0; a < row.size(); ++a) row[a] = stored.prices.rate(s, a);
    prices[instance.strata().at(s).name] = row;
  }
  doc["prices"] = std::move(prices);
  std::vector<std::string> arc_ids;
  for (const Arc& a : net.arcs()) arc_ids.push_back(a.id);
  doc["arc_ids"] = arc_ids;
  doc["total_flow"] = sol.total_flow;
  doc["arc_time"] = sol.arc_time;
  doc["arc_delay"] = sol.arc_delay;
  json strata = json::object();
  for (std::size_t s = 0; s < sol.stratum_flow.size(); ++s) {
    strata[instance.strata().at(s).name] = sol.stratum_flow[s];
  }
  doc["stratum_flow"] = std::move(strata);
  doc["status"] = {{"converged", sol.converged},
                   {"inner_converged", sol.inner_converged},
                   {"outer_iterations", sol.outer_iterations},
                   {"outer_residual", sol.outer_residual},
                   {"max_inner_residual", sol.max_inner_residual}};
  json log = json::array();
  for (const IterationRecord& r : sol.log) {
    log.push_back({{"iteration", r.iteration},
                   {"residual", r.residual},
                   {"step", r.step},
                   {"max_inner_iterations", r.max_inner_iterations}});
  }
  doc["log"] = std::move(log);
  json subs = json::array();
  for (const CommoditySolution& c : sol.commodities) {
    subs.push_back({{"stratum", instance.strata().at(c.stratum).name},
                    {"destination", net.node(c.destination).id},
                    {"tau", c.tau},
                    {"arc_prob", c.arc_prob},
                    {"demand", c.demand},
                    {"outside_prob", c.outside_prob},
                    {"started", c.started},
                    {"entering_flow", c.entering_flow},
                    {"arc_flow", c.arc_flow},
                    {"inner_iterations", c.inner_iterations},
                    {"inner_residual", c.inner_residual},
                    {"inner_converged", c.inner_converged}});
  }
  doc["commodities"] = std::move(subs);
  return doc.dump() + "\n";
}

StoredSolution SolutionFromJson(const Instance& instance, const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError("solution", std::string("malformed JSON: ") + e.what());
  }
  const int version = doc.value("schema_version", 0);
  if (version != kSolutionVersion) {
    throw SchemaVersionError("solution schema version " + std::to_string(version) +
                             " is not supported (expected " +
                             std::to_string(kSolutionVersion) + ")");
  }
  const Network& net = instance.network();
  const std::size_t n = net.num_nodes();
  const std::size_t m = net.num_arcs();
  try {
    StoredSolution stored;
    if (doc.contains("scheme")) {
      SchemeSpec spec;
      spec.family = ParseSchemeFamily(doc["scheme"].at("family").get<std::string>());
      spec.rates = doc["scheme"].at("rates").get<std::vector<double>>();
      stored.scheme = spec;
    }
    const auto arc_ids = doc.at("arc_ids").get<std::vector<std::string>>();
    if (arc_ids.size() != m) throw ValidationError("arc_ids", "arc count mismatch");
    for (ArcIndex a = 0; a < m; ++a) {
      if (arc_ids[a] != net.arc(a).id) {
        throw ValidationError("arc_ids", "solution was computed for a different network");
      }
    }
    stored.prices = ExpandedPrices(instance.strata().size(), m);
    for (std::size_t s = 0; s < instance.strata().size(); ++s) {
      const auto row =
          Doubles(doc.at("prices").at(instance.strata()[s].name), m, "prices");
      for (ArcIndex a = 0; a < m; ++a) stored.prices.set_rate(s, a, row[a]);
    }
    EquilibriumSolution& sol = stored.solution;
    sol.total_flow = Doubles(doc.at("total_flow"), m, "total_flow");
    sol.arc_time = Doubles(doc.at("arc_time"), m, "arc_time");
    if (doc.contains("arc_delay")) sol.arc_delay = Doubles(doc.at("arc_delay"), m, "arc_delay");
    for (const Stratum& s : instance.strata()) {
      sol.stratum_flow.push_back(Doubles(doc.at("stratum_flow").at(s.name), m, "stratum_flow"));
    }
    const json& st = doc.at("status");
    sol.converged = st.at("converged").get<bool>();
    sol.inner_converged = st.at("inner_converged").get<bool>();
    sol.outer_iterations = st.at("outer_iterations").get<int>();
    sol.outer_residual = st.at("outer_residual").get<double>();
    sol.max_inner_residual = st.at("max_inner_residual").get<double>();
    for (const json& r : doc.at("log")) {
      IterationRecord rec;
      rec.iteration = r.at("iteration").get<int>();
      rec.residual = r.at("residual").get<double>();
      rec.step = r.at("step").get<double>();
      rec.max_inner_iterations = r.at("max_inner_iterations").get<int>();
      sol.log.push_back(rec);
    }
    const json& subs = doc.at("commodities");
    if (subs.size() != instance.commodities().size()) {
      throw ValidationError("commodities", "commodity count mismatch");
    }
    for (std::size_t k = 0; k < subs.size(); ++k) {
      const json& c = subs[k];
      CommoditySolution sub;
      sub.stratum = instance.stratum_index(c.at("stratum").get<std::string>());
      sub.destination = net.node_index(c.at("destination").get<std::string>());
      if (sub.stratum != instance.commodities()[k].stratum ||
          sub.destination != instance.commodities()[k].destination) {
        throw ValidationError("commodities", "commodity order does not match the instance");
      }
      sub.tau = Doubles(c.at("tau"), n, "tau");
      sub.arc_prob = Doubles(c.at("arc_prob"), m, "arc_prob");
      sub.demand = Doubles(c.at("demand"), n, "demand");
      sub.outside_prob = Doubles(c.at("outside_prob"), n, "outside_prob");
      sub.started = Doubles(c.at("started"), n, "started");
      sub.entering_flow = Doubles(c.at("entering_flow"), n, "entering_flow");
      sub.arc_flow = Doubles(c.at("arc_flow"), m, "arc_flow");
      sub.inner_iterations = c.at("inner_iterations").get<int>();
      sub.inner_residual = c.at("inner_residual").get<double>();
      sub.inner_converged = c.at("inner_converged").get<bool>();
      sol.commodities.push_back(std::move(sub));
    }
    return stored;
  } catch (const json::exception& e) {
    throw ValidationError("solution", std::string("bad solution document: ") + e.what());
  }
}

void SaveSolution(const Instance& instance, const StoredSolution& stored,
                  const std::filesystem::path& path) {
  WriteTextFileAtomic(path, SolutionToJson(instance, stored));
}

StoredSolution LoadSolution(const Instance& instance, const std::filesystem::path& path) {
  return SolutionFromJson(instance, ReadTextFile(path));
}

}  // namespace mte
