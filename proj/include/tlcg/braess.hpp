#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tlcg/equilibrium.hpp"
#include "tlcg/network.hpp"

namespace tlcg {

// ---------------------------------------------------------------------------
// Braess detection

/// A baseline game and a modified game over the same nodes, edges and
/// populations. The paradox needs c'_e <= c_e everywhere and d'_i <= d_i.
struct GamePair {
  Network baseline;
  Network modified;
};

struct DominanceCheck {
  bool holds = false;
  bool grid_holds = false;
  /// Exact check for clamped-affine costs; empty when some edge has no affine form.
  std::optional<bool> symbolic_holds;
  std::vector<std::string> violations;
};

/// Compares both games' costs on 200 points over [0, 2 * total baseline demand]
/// plus demands and structure.
DominanceCheck check_dominance(const GamePair& pair, std::size_t grid_points = 200);

struct BraessReport {
  double baseline_cost = 0.0;
  double modified_cost = 0.0;
  bool paradox = false;
  DominanceCheck dominance;
};

/// Solves both equilibria. Throws DomainError when dominance fails or a solve
/// does not converge.
BraessReport detect_braess(const GamePair& pair, const SolverConfig& cfg = {});
nlohmann::json braess_report_to_json(const BraessReport& report);

// ---------------------------------------------------------------------------
// Immunization by light cycles

enum class ImmunizationMode { Exact, Bounded };

struct ImmunizationResult {
  Network game;
  std::vector<std::size_t> suppressed;  // Ê
  bool immunity_guaranteed = false;
  bool heuristic = false;               // Ê from the greedy search
};

/// Closes every edge of the maximal series-parallel complement Ê with a red
/// light (p = 1, Blocking) in exact mode or p = p_max in bounded mode. Every
/// other edge into a light node v gets p = 1 / (in(v) - in_Ê(v)) when that
/// denominator exceeds 1, else 0. Throws DomainError if some ê has no light.
ImmunizationResult immunize(const Network& net, ImmunizationMode mode, double p_max = kDefaultMaxRed);

// ---------------------------------------------------------------------------
// Wheatstone network with one light
//
// Edges O→B (cost x), O→C (1 + w(·, p)), B→C (w(·, 1 - p)), B→D (1), C→D (x),
// w(x, p) = x (e^p - 1). x is the load on O→B and y the load on B→D, so the
// middle edge carries x - y.

struct WheatstoneFlows {
  double x = 0.0;
  double y = 0.0;
};

/// x = y = e^p / (1 + e^p) (no middle flow).
WheatstoneFlows wheatstone_so_flow(double p);

struct WheatstonePoint {
  double p = 0.0;
  double x = 0.0;  // TLUE
  double y = 0.0;
  double sc_tlue = 0.0;
  double so_x = 0.0;
  double so_y = 0.0;
  double sc_so = 0.0;
  double poa = 0.0;

  double mid_flow() const { return x - y; }
};

/// Equilibrium and optimum of the 3-path network by nested bisection on the
/// equal-cost conditions (residual <= 1e-10). Requires 0 <= p < 1.
WheatstonePoint wheatstone_tlue(double p, double demand = 1.0);

/// Social cost of the Wheatstone game for path flows given by (x, y).
double wheatstone_social_cost(double p, double x, double y, double demand = 1.0);

// ---------------------------------------------------------------------------
// Parameter sweeps

/// Edge indices of a Wheatstone-shaped two-terminal network.
struct WheatstoneLayout {
  std::size_t top_in;      // O→B
  std::size_t bottom_in;   // O→C
  std::size_t middle;      // B→C
  std::size_t top_out;     // B→D
  std::size_t bottom_out;  // C→D
};
std::optional<WheatstoneLayout> find_wheatstone_layout(const Network& net);

/// Sets p on Primary edges and 1 - p on Complement edges.
Network with_red_proportion(Network net, double p);

/// `steps` evenly spaced values from `from` to `to` inclusive.
std::vector<double> linspace(double from, double to, std::size_t steps);

struct SweepPoint {
  double p = 0.0;
  double sc_tlue = 0.0;
  double sc_so = 0.0;
  double poa = 0.0;
  std::optional<double> x;
  std::optional<double> y;
  std::optional<double> mid_flow;
  bool converged = false;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  bool sc_tlue_increasing = false;
  bool sc_so_increasing = false;
};

/// Solves TLUE and SO at every grid value (concurrently, merged by index).
SweepResult sweep_p(const Network& template_net, const std::vector<double>& grid, const SolverConfig& cfg = {});

/// Same as sweep_p for the dedicated Wheatstone solver.
std::vector<WheatstonePoint> sweep_wheatstone(const std::vector<double>& grid, double demand = 1.0);

/// Columns `p,sc_tlue,sc_so,poa,x,y,mid_flow`.
std::string sweep_to_csv(const SweepResult& sweep);

}  // namespace tlcg
