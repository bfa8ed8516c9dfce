#include "tlcg/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace tlcg {

using nlohmann::json;

std::string format_number(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", value == 0.0 ? 0.0 : value);
  return buf;
}

double round_significant(double value) {
  if (!std::isfinite(value)) return value;
  return std::stod(format_number(value));
}

namespace {

json number_or_string(double value) {
  if (std::isfinite(value)) return round_significant(value);
  return format_number(value);
}

double read_number(const json& j) {
  if (j.is_string()) return std::stod(j.get<std::string>());
  return j.get<double>();
}

}  // namespace

json result_to_json(const Network& net, const EquilibriumResult& result) {
  json paths = json::array();
  for (const auto& pc : result.path_costs) {
    json ids = json::array();
    for (std::size_t e : pc.path) ids.push_back(net.edges[e].id);
    paths.push_back({{"population", net.populations[pc.population].id},
                     {"path", ids},
                     {"flow", number_or_string(pc.flow)},
                     {"cost", number_or_string(pc.cost)}});
  }
  json edges = json::array();
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    edges.push_back({{"id", net.edges[e].id},
                     {"load", number_or_string(result.flow.edge_loads[e])},
                     {"cost", number_or_string(eval_cost(net.edges[e].cost, result.flow.edge_loads[e]))}});
  }
  return json{{"kind", result.objective == Objective::UserEquilibrium ? "ue" : "so"},
              {"social_cost", number_or_string(result.social_cost)},
              {"relative_gap", number_or_string(result.relative_gap)},
              {"iterations", result.iterations},
              {"converged", result.converged},
              {"nonconvex", result.nonconvex},
              {"paths", paths},
              {"edges", edges}};
}

EquilibriumResult result_from_json(const Network& net, const json& j) {
  EquilibriumResult result;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind != "ue" && kind != "so") throw ParseError("result.kind must be 'ue' or 'so'");
  result.objective = kind == "ue" ? Objective::UserEquilibrium : Objective::SystemOptimum;
  result.social_cost = read_number(j.at("social_cost"));
  result.relative_gap = read_number(j.at("relative_gap"));
  result.iterations = j.at("iterations").get<std::size_t>();
  result.converged = j.at("converged").get<bool>();
  result.nonconvex = j.at("nonconvex").get<bool>();
  result.flow = FlowDistribution::empty(net);

  auto population_index = [&](const std::string& id) {
    for (std::size_t i = 0; i < net.populations.size(); ++i) {
      if (net.populations[i].id == id) return i;
    }
    throw ParseError("result references unknown population '" + id + "'");
  };
  for (const auto& entry : j.at("paths")) {
    PathCost pc;
    pc.population = population_index(entry.at("population").get<std::string>());
    for (const auto& id : entry.at("path")) {
      const auto e = net.edge_index(id.get<std::string>());
      if (!e) throw ParseError("result references unknown edge '" + id.get<std::string>() + "'");
      pc.path.push_back(*e);
    }
    pc.flow = read_number(entry.at("flow"));
    pc.cost = read_number(entry.at("cost"));
    if (pc.flow > 0.0) result.flow.add(net, pc.population, pc.path, pc.flow);
    result.path_costs.push_back(std::move(pc));
  }
  for (const auto& entry : j.at("edges")) {
    const auto e = net.edge_index(entry.at("id").get<std::string>());
    if (!e) throw ParseError("result references unknown edge '" + entry.at("id").get<std::string>() + "'");
    result.flow.edge_loads[*e] = read_number(entry.at("load"));
  }
  return result;
}

std::string result_to_csv(const Network& net, const EquilibriumResult& result) {
  std::ostringstream out;
  out << "population,path,flow,cost\n";
  for (const auto& pc : result.path_costs) {
    out << net.populations[pc.population].id << ',' << path_label(net, pc.path) << ',' << format_number(pc.flow)
        << ',' << format_number(pc.cost) << '\n';
  }
  return out.str();
}

}  // namespace tlcg
