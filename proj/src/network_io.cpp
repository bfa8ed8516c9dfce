#include "tlcg/network_io.hpp"

#include <fstream>
#include <sstream>

namespace tlcg {

using nlohmann::json;

namespace {

std::string_view role_name(PhaseRole role) {
  switch (role) {
    case PhaseRole::Fixed:
      return "fixed";
    case PhaseRole::Primary:
      return "primary";
    case PhaseRole::Complement:
      return "complement";
  }
  return "fixed";
}

PhaseRole role_from(std::string_view name) {
  if (name == "fixed") return PhaseRole::Fixed;
  if (name == "primary") return PhaseRole::Primary;
  if (name == "complement") return PhaseRole::Complement;
  throw ParseError("unknown p_role '" + std::string(name) + "'");
}

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
  return j.at(key);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ParseError(where + ": expected a number");
  return j.get<double>();
}

std::string text(const json& j, const std::string& where) {
  if (!j.is_string()) throw ParseError(where + ": expected a string");
  return j.get<std::string>();
}

}  // namespace

json cost_to_json(const EdgeCost& cost) {
  json base;
  if (const auto* a = std::get_if<Affine>(&cost.base)) {
    base["affine"] = {a->slope, a->intercept};
  } else if (const auto* c = std::get_if<Constant>(&cost.base)) {
    base["constant"] = c->value;
  } else {
    base["polynomial"] = std::get<Polynomial>(cost.base).coeffs;
  }
  return json{{"base", base}, {"waiting", {{"family", std::string(to_string(cost.waiting))}, {"p", cost.p}}}};
}

EdgeCost cost_from_json(const json& j) {
  EdgeCost cost;
  const auto& base = require(j, "base", "cost");
  if (base.contains("affine")) {
    const auto& ab = base.at("affine");
    if (!ab.is_array() || ab.size() != 2) throw ParseError("cost.base.affine: expected [a, b]");
    cost.base = Affine{number(ab[0], "cost.base.affine"), number(ab[1], "cost.base.affine")};
  } else if (base.contains("constant")) {
    cost.base = Constant{number(base.at("constant"), "cost.base.constant")};
  } else if (base.contains("polynomial")) {
    const auto& cs = base.at("polynomial");
    if (!cs.is_array()) throw ParseError("cost.base.polynomial: expected an array");
    Polynomial poly;
    for (const auto& c : cs) poly.coeffs.push_back(number(c, "cost.base.polynomial"));
    cost.base = std::move(poly);
  } else {
    throw ParseError("cost.base: expected one of affine, constant, polynomial");
  }
  if (j.contains("waiting")) {
    const auto& w = j.at("waiting");
    try {
      cost.waiting = waiting_family_from_string(text(require(w, "family", "cost.waiting"), "cost.waiting.family"));
    } catch (const ParseError&) {
      throw;
    } catch (const DomainError& e) {
      throw ParseError(std::string("cost.waiting: ") + e.what());
    }
    if (w.contains("p")) cost.p = number(w.at("p"), "cost.waiting.p");
  }
  return cost;
}

json network_to_json(const Network& net) {
  json edges = json::array();
  for (const auto& e : net.edges) {
    json cost = cost_to_json(e.cost);
    if (e.phase_role != PhaseRole::Fixed) cost["waiting"]["p_role"] = std::string(role_name(e.phase_role));
    edges.push_back({{"id", e.id}, {"from", e.from}, {"to", e.to}, {"cost", cost}});
  }
  json pops = json::array();
  for (const auto& p : net.populations) {
    pops.push_back({{"id", p.id}, {"origin", p.origin}, {"destination", p.destination}, {"demand", p.demand}});
  }
  return json{{"nodes", net.nodes}, {"edges", edges}, {"populations", pops}};
}

Network network_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("network: expected a JSON object");
  Network net;
  const auto& nodes = require(j, "nodes", "network");
  if (!nodes.is_array()) throw ParseError("network.nodes: expected an array");
  for (const auto& n : nodes) net.nodes.push_back(text(n, "network.nodes"));

  const auto& edges = require(j, "edges", "network");
  if (!edges.is_array()) throw ParseError("network.edges: expected an array");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string where = "network.edges[" + std::to_string(i) + "]";
    const auto& e = edges[i];
    Edge edge;
    edge.id = text(require(e, "id", where), where + ".id");
    edge.from = text(require(e, "from", where), where + ".from");
    edge.to = text(require(e, "to", where), where + ".to");
    if (e.contains("cost")) {
      try {
        edge.cost = cost_from_json(e.at("cost"));
      } catch (const ParseError& err) {
        throw ParseError(where + "." + err.what());
      }
      const auto& cost = e.at("cost");
      if (cost.contains("waiting") && cost.at("waiting").contains("p_role")) {
        edge.phase_role = role_from(text(cost.at("waiting").at("p_role"), where + ".cost.waiting.p_role"));
      }
    }
    net.edges.push_back(std::move(edge));
  }

  const auto& pops = require(j, "populations", "network");
  if (!pops.is_array()) throw ParseError("network.populations: expected an array");
  for (std::size_t i = 0; i < pops.size(); ++i) {
    const std::string where = "network.populations[" + std::to_string(i) + "]";
    const auto& p = pops[i];
    Population pop;
    pop.id = p.contains("id") ? text(p.at("id"), where + ".id") : "pop" + std::to_string(i);
    pop.origin = text(require(p, "origin", where), where + ".origin");
    pop.destination = text(require(p, "destination", where), where + ".destination");
    pop.demand = number(require(p, "demand", where), where + ".demand");
    net.populations.push_back(std::move(pop));
  }
  return net;
}

json parse_json(std::string_view input) {
  try {
    return json::parse(input);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into line/column.
    int line = 1, column = 1;
    const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, input.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (input[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError("JSON syntax error", line, column);
  }
}

Network parse_network(std::string_view input) { return network_from_json(parse_json(input)); }

std::string serialize_network(const Network& net) { return network_to_json(net).dump(2) + "\n"; }

Network load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open network file '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return validate_network(parse_network(buffer.str()));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace tlcg
