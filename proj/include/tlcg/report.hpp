#pragma once

// Machine-readable result formats. Numbers are written with 10 significant
// digits.

#include <string>

#include <json.hpp>

#include "tlcg/equilibrium.hpp"

namespace tlcg {

/// 10 significant digits, "%.10g" style.
std::string format_number(double value);
/// Rounds to 10 significant digits (what JSON output stores).
double round_significant(double value);

nlohmann::json result_to_json(const Network& net, const EquilibriumResult& result);
/// Inverse of result_to_json; path ids are resolved against `net`. The
/// potential trace is not part of the report.
EquilibriumResult result_from_json(const Network& net, const nlohmann::json& j);

/// Header `population,path,flow,cost`, one row per reported path.
std::string result_to_csv(const Network& net, const EquilibriumResult& result);

}  // namespace tlcg
