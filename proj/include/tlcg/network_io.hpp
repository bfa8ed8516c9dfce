#pragma once

// JSON network files.
//
// {
//   "nodes": ["O", "B", "C", "D"],
//   "edges": [
//     {"id": "OC", "from": "O", "to": "C",
//      "cost": {"base": {"affine": [0, 1]},
//               "waiting": {"family": "simple_exp", "p": 0.5, "p_role": "primary"}}}
//   ],
//   "populations": [{"id": "all", "origin": "O", "destination": "D", "demand": 1}]
// }
//
// base is one of {"affine": [a, b]}, {"constant": b}, {"polynomial": [c0, c1, ...]}.
// waiting is optional (defaults to zero); p defaults to 0 and p_role to "fixed".

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "tlcg/network.hpp"

namespace tlcg {

nlohmann::json cost_to_json(const EdgeCost& cost);
EdgeCost cost_from_json(const nlohmann::json& j);

nlohmann::json network_to_json(const Network& net);
/// Structural parse only; call validate_network for the invariants.
Network network_from_json(const nlohmann::json& j);

/// Parses JSON text; syntax errors carry line and column.
Network parse_network(std::string_view text);
std::string serialize_network(const Network& net);

/// Reads, parses and validates a network file.
Network load_network(const std::filesystem::path& path);

/// Parses JSON text, turning syntax errors into ParseError with line/column.
nlohmann::json parse_json(std::string_view text);

}  // namespace tlcg
