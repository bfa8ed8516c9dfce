#pragma once

// Traffic-light user equilibrium and social optimum solvers.
//
// Both are potential minimizations over path flows: the TLUE minimizes the
// Beckmann potential sum_e int_0^{f_e} c_e(z) dz, the social optimum is the
// equilibrium of the game whose edge costs are the marginal costs
// d/dx [x c_e(x)], whose potential is the social cost itself. The solver is
// Frank-Wolfe with exact line search, followed each iteration by pairwise
// steps that shift flow from the costliest used path onto the best response.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tlcg/network.hpp"

namespace tlcg {

enum class Objective { UserEquilibrium, SystemOptimum };

struct SolverConfig {
  double tolerance = 1e-6;            // relative gap
  std::size_t max_iterations = 10000;
  bool pairwise_steps = true;
  std::uint64_t seed = 0;             // for random initializations
  std::size_t path_cap = 64;          // enumeration cap (random init, SO fallback)

  void validate() const;
};

struct PathFlow {
  Path path;
  double flow = 0.0;
};

struct FlowDistribution {
  /// Per population, paths with positive flow sorted by path_less.
  std::vector<std::vector<PathFlow>> paths;
  std::vector<double> edge_loads;

  static FlowDistribution empty(const Network& net);
  /// Adds `amount` to the path's flow (creating the entry) and to the loads.
  void add(const Network& net, std::size_t pop, const Path& path, double amount);
  std::vector<double> recompute_loads(const Network& net) const;
  double path_flow(std::size_t pop, const Path& path) const;
};

/// Violations of feasibility: demand conservation, non-negativity, path
/// shape, load consistency. Empty when feasible.
std::vector<std::string> feasibility_violations(const Network& net, const FlowDistribution& flow,
                                                double tol = 1e-9);

struct PathCost {
  std::size_t population = 0;
  Path path;
  double flow = 0.0;
  double cost = 0.0;
};

struct EquilibriumResult {
  Objective objective = Objective::UserEquilibrium;
  FlowDistribution flow;
  double social_cost = 0.0;
  double relative_gap = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  bool nonconvex = false;  // SO solved by the projected-gradient fallback
  /// Used paths plus each population's best response, with user costs.
  std::vector<PathCost> path_costs;
  /// Potential after initialization and after every iteration.
  std::vector<double> potential_trace;
};

/// Edge cost under the objective: c_e for UE, marginal cost for SO.
double link_cost(const Edge& edge, double load, Objective objective);

/// Sum over edges of int_0^{f_e} c_e (UE) or f_e c_e(f_e) (SO).
double potential(const Network& net, const std::vector<double>& loads, Objective objective);

/// Cost of a path at the given loads.
double path_cost(const Network& net, const std::vector<double>& loads, const Path& path,
                 Objective objective = Objective::UserEquilibrium);

/// Minimum-cost OD path at the given loads, ties broken by path_less. Blocked
/// edges are skipped. Throws DomainError when every route is blocked.
Path best_response(const Network& net, const std::vector<double>& loads, std::size_t pop,
                   Objective objective = Objective::UserEquilibrium);

/// Edge-sum social cost; cross-checked against the population-sum form.
double social_cost(const Network& net, const FlowDistribution& flow);

/// (sum_i sum_s x_s C(s) - sum_i d_i min_s C(s)) / sum_i sum_s x_s C(s).
double relative_gap(const Network& net, const FlowDistribution& flow,
                    Objective objective = Objective::UserEquilibrium);

/// Random feasible flow over the enumerated unblocked paths.
FlowDistribution random_feasible_flow(const Network& net, std::uint64_t seed, std::size_t cap = 64);

/// Minimizes the objective's potential. `init` must be feasible when given.
EquilibriumResult solve_equilibrium(const Network& net, Objective objective, const SolverConfig& cfg = {},
                                    std::optional<FlowDistribution> init = std::nullopt);

EquilibriumResult solve_tlue(const Network& net, const SolverConfig& cfg = {},
                             std::optional<FlowDistribution> init = std::nullopt);

/// True when x c_e(x) passes a second-difference convexity check on a grid
/// over [0, 2 * total demand] for every edge.
bool social_cost_convex(const Network& net);

/// Social optimum; falls back to solve_so_projected (and sets nonconvex) when
/// the convexity check fails.
EquilibriumResult solve_so(const Network& net, const SolverConfig& cfg = {});

/// Projected gradient descent on enumerated path flows.
EquilibriumResult solve_so_projected(const Network& net, const SolverConfig& cfg = {});

/// SC(TLUE) / SC(SO). +inf when the optimum is free but the equilibrium is not.
double price_of_anarchy(const Network& net, const SolverConfig& cfg = {});

/// Every path with flow > flow_floor costs at most (1 + tol) times the
/// population's cheapest path.
bool satisfies_equilibrium_condition(const Network& net, const FlowDistribution& flow, double tol,
                                     Objective objective = Objective::UserEquilibrium,
                                     double flow_floor = 1e-8);

}  // namespace tlcg
