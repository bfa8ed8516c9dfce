#include "tlcg/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <random>
#include <stdexcept>

namespace tlcg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool path_edges_valid(const Network& net, const Population& pop, const Path& path) {
  if (path.empty()) return false;
  std::string at = pop.origin;
  std::vector<std::string> seen{at};
  for (std::size_t e : path) {
    if (e >= net.edges.size() || net.edges[e].from != at) return false;
    at = net.edges[e].to;
    if (std::find(seen.begin(), seen.end(), at) != seen.end()) return false;
    seen.push_back(at);
  }
  return at == pop.destination;
}

std::vector<double> link_costs(const Network& net, const std::vector<double>& loads, Objective objective) {
  std::vector<double> costs(net.edges.size());
  for (std::size_t e = 0; e < net.edges.size(); ++e) costs[e] = link_cost(net.edges[e], loads[e], objective);
  return costs;
}

double sum_costs(const std::vector<double>& costs, const Path& path) {
  double total = 0.0;
  for (std::size_t e : path) total += costs[e];
  return total;
}

// Best response from precomputed link costs (non-negative, +inf = skip).
Path shortest_path(const Network& net, const std::vector<double>& costs, const Population& pop) {
  const std::size_t n = net.nodes.size();
  std::vector<std::vector<std::size_t>> out(n);
  std::vector<std::size_t> head(net.edges.size()), tail(net.edges.size());
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    tail[e] = *net.node_index(net.edges[e].from);
    head[e] = *net.node_index(net.edges[e].to);
    if (std::isfinite(costs[e])) out[tail[e]].push_back(e);
  }
  for (auto& edges : out) {
    std::sort(edges.begin(), edges.end(), [&](auto a, auto b) { return net.edges[a].id < net.edges[b].id; });
  }
  const std::size_t o = *net.node_index(pop.origin);
  const std::size_t d = *net.node_index(pop.destination);

  std::vector<double> dist(n, kInf);
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[o] = 0.0;
  queue.push({0.0, o});
  while (!queue.empty()) {
    const auto [du, u] = queue.top();
    queue.pop();
    if (du > dist[u]) continue;
    for (std::size_t e : out[u]) {
      const double nd = du + costs[e];
      if (nd < dist[head[e]]) {
        dist[head[e]] = nd;
        queue.push({nd, head[e]});
      }
    }
  }
  if (!std::isfinite(dist[d])) {
    throw DomainError("no finite-cost route from '" + pop.origin + "' to '" + pop.destination + "'");
  }

  auto tight = [&](std::size_t e) {
    const double target = dist[head[e]];
    return std::isfinite(dist[tail[e]]) && dist[tail[e]] + costs[e] <= target + 1e-12 * std::max(1.0, std::abs(target));
  };
  // Can `from` reach d over tight edges without touching `blocked` nodes?
  auto reaches = [&](std::size_t from, const std::vector<bool>& blocked) {
    std::vector<bool> seen = blocked;
    std::vector<std::size_t> stack{from};
    seen[from] = true;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      if (v == d) return true;
      for (std::size_t e : out[v]) {
        if (tight(e) && !seen[head[e]]) {
          seen[head[e]] = true;
          stack.push_back(head[e]);
        }
      }
    }
    return false;
  };

  Path path;
  std::vector<bool> visited(n, false);
  visited[o] = true;
  std::size_t at = o;
  while (at != d) {
    bool moved = false;
    for (std::size_t e : out[at]) {
      if (!tight(e) || visited[head[e]]) continue;
      if (!reaches(head[e], visited)) continue;
      path.push_back(e);
      at = head[e];
      visited[at] = true;
      moved = true;
      break;
    }
    if (!moved) throw std::logic_error("shortest-path reconstruction failed");
  }
  return path;
}

std::vector<Path> best_responses(const Network& net, const std::vector<double>& costs) {
  std::vector<Path> best;
  best.reserve(net.populations.size());
  for (const auto& pop : net.populations) best.push_back(shortest_path(net, costs, pop));
  return best;
}

double gap_from_costs(const Network& net, const FlowDistribution& flow, const std::vector<double>& costs,
                      const std::vector<Path>& best) {
  double total = 0.0;
  double lower = 0.0;
  for (std::size_t i = 0; i < net.populations.size(); ++i) {
    for (const auto& pf : flow.paths[i]) total += pf.flow * sum_costs(costs, pf.path);
    lower += net.populations[i].demand * sum_costs(costs, best[i]);
  }
  if (total <= 0.0) return 0.0;
  return std::max(0.0, (total - lower) / total);
}

// Largest t in [0, t_max] with sum_e dir_e c_e(f_e + t dir_e) <= 0, by bisection.
double line_search(const Network& net, const std::vector<double>& loads, const std::vector<double>& dir,
                   double t_max, Objective objective, bool& finite) {
  auto slope = [&](double t) {
    double g = 0.0;
    for (std::size_t e = 0; e < dir.size(); ++e) {
      if (dir[e] == 0.0) continue;
      g += dir[e] * link_cost(net.edges[e], std::max(0.0, loads[e] + t * dir[e]), objective);
    }
    return g;
  };
  finite = true;
  const double g0 = slope(0.0);
  if (!std::isfinite(g0)) {
    finite = false;
    return 0.0;
  }
  if (g0 >= 0.0) return 0.0;
  const double g1 = slope(t_max);
  if (!std::isfinite(g1)) {
    finite = false;
    return 0.0;
  }
  if (g1 <= 0.0) return t_max;
  double lo = 0.0, hi = t_max;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (slope(mid) <= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

void scale_flows(FlowDistribution& flow, double factor) {
  for (auto& pop_paths : flow.paths) {
    for (auto& pf : pop_paths) pf.flow *= factor;
  }
}

void drop_empty(FlowDistribution& flow) {
  for (auto& pop_paths : flow.paths) {
    std::erase_if(pop_paths, [](const PathFlow& pf) { return !(pf.flow > 0.0); });
  }
}

std::vector<PathCost> report_paths(const Network& net, const FlowDistribution& flow) {
  const auto costs = link_costs(net, flow.edge_loads, Objective::UserEquilibrium);
  std::vector<PathCost> out;
  for (std::size_t i = 0; i < net.populations.size(); ++i) {
    std::vector<Path> listed;
    for (const auto& pf : flow.paths[i]) {
      out.push_back({i, pf.path, pf.flow, sum_costs(costs, pf.path)});
      listed.push_back(pf.path);
    }
    try {
      const Path best = shortest_path(net, costs, net.populations[i]);
      if (std::find(listed.begin(), listed.end(), best) == listed.end()) {
        out.push_back({i, best, 0.0, sum_costs(costs, best)});
      }
    } catch (const DomainError&) {
    }
  }
  return out;
}

FlowDistribution all_or_nothing(const Network& net, const std::vector<Path>& best) {
  auto flow = FlowDistribution::empty(net);
  for (std::size_t i = 0; i < net.populations.size(); ++i) {
    if (net.populations[i].demand > 0.0) flow.add(net, i, best[i], net.populations[i].demand);
  }
  return flow;
}

void check_potential(std::vector<double>& trace, double value) {
  if (!trace.empty()) {
    const double prev = trace.back();
    if (value > prev + 1e-12 * std::max(1.0, std::abs(prev))) {
      throw std::logic_error("potential increased across a line-searched iteration");
    }
  }
  trace.push_back(value);
}

}  // namespace

void SolverConfig::validate() const {
  if (!(tolerance > 0.0)) throw DomainError("solver tolerance must be positive");
  if (max_iterations < 1) throw DomainError("max iterations must be at least 1");
}

FlowDistribution FlowDistribution::empty(const Network& net) {
  FlowDistribution flow;
  flow.paths.resize(net.populations.size());
  flow.edge_loads.assign(net.edges.size(), 0.0);
  return flow;
}

void FlowDistribution::add(const Network& net, std::size_t pop, const Path& path, double amount) {
  auto& list = paths.at(pop);
  auto it = std::lower_bound(list.begin(), list.end(), path,
                             [&](const PathFlow& pf, const Path& p) { return path_less(net, pf.path, p); });
  if (it != list.end() && it->path == path) {
    it->flow += amount;
  } else {
    list.insert(it, PathFlow{path, amount});
  }
  for (std::size_t e : path) edge_loads[e] += amount;
}

std::vector<double> FlowDistribution::recompute_loads(const Network& net) const {
  std::vector<double> loads(net.edges.size(), 0.0);
  for (const auto& pop_paths : paths) {
    for (const auto& pf : pop_paths) {
      for (std::size_t e : pf.path) loads[e] += pf.flow;
    }
  }
  return loads;
}

double FlowDistribution::path_flow(std::size_t pop, const Path& path) const {
  for (const auto& pf : paths.at(pop)) {
    if (pf.path == path) return pf.flow;
  }
  return 0.0;
}

std::vector<std::string> feasibility_violations(const Network& net, const FlowDistribution& flow, double tol) {
  std::vector<std::string> out;
  if (flow.paths.size() != net.populations.size()) {
    out.push_back("flow has " + std::to_string(flow.paths.size()) + " populations, network has " +
                  std::to_string(net.populations.size()));
    return out;
  }
  for (std::size_t i = 0; i < net.populations.size(); ++i) {
    const auto& pop = net.populations[i];
    double total = 0.0;
    for (const auto& pf : flow.paths[i]) {
      if (pf.flow < 0.0) out.push_back("negative flow on path " + path_label(net, pf.path));
      if (!path_edges_valid(net, pop, pf.path)) {
        out.push_back("path " + path_label(net, pf.path) + " is not a simple OD path of '" + pop.id + "'");
      }
      total += pf.flow;
    }
    if (std::abs(total - pop.demand) > tol * std::max(1.0, pop.demand)) {
      out.push_back("population '" + pop.id + "' routes " + std::to_string(total) + " but demands " +
                    std::to_string(pop.demand));
    }
  }
  if (flow.edge_loads.size() != net.edges.size()) {
    out.push_back("edge load vector has the wrong size");
    return out;
  }
  const auto loads = flow.recompute_loads(net);
  for (std::size_t e = 0; e < loads.size(); ++e) {
    if (std::abs(loads[e] - flow.edge_loads[e]) > tol * std::max(1.0, std::abs(loads[e]))) {
      out.push_back("edge '" + net.edges[e].id + "' load disagrees with its path flows");
    }
  }
  return out;
}

double link_cost(const Edge& edge, double load, Objective objective) {
  return objective == Objective::UserEquilibrium ? eval_cost(edge.cost, load) : marginal_cost(edge.cost, load);
}

double potential(const Network& net, const std::vector<double>& loads, Objective objective) {
  double total = 0.0;
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    const double f = loads[e];
    if (f <= 0.0) continue;
    if (is_blocked(net.edges[e].cost)) return kInf;
    total += objective == Objective::UserEquilibrium ? integral_cost(net.edges[e].cost, f)
                                                     : f * eval_cost(net.edges[e].cost, f);
  }
  return total;
}

double path_cost(const Network& net, const std::vector<double>& loads, const Path& path, Objective objective) {
  double total = 0.0;
  for (std::size_t e : path) total += link_cost(net.edges[e], loads[e], objective);
  return total;
}

Path best_response(const Network& net, const std::vector<double>& loads, std::size_t pop, Objective objective) {
  return shortest_path(net, link_costs(net, loads, objective), net.populations.at(pop));
}

double social_cost(const Network& net, const FlowDistribution& flow) {
  const auto violations = feasibility_violations(net, flow);
  if (!violations.empty()) throw DomainError("infeasible flow: " + violations.front());

  double edge_sum = 0.0;
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    const double f = flow.edge_loads[e];
    if (f > 0.0) edge_sum += f * eval_cost(net.edges[e].cost, f);
  }
  double population_sum = 0.0;
  for (std::size_t i = 0; i < net.populations.size(); ++i) {
    for (const auto& pf : flow.paths[i]) {
      if (pf.flow > 0.0) population_sum += pf.flow * path_cost(net, flow.edge_loads, pf.path);
    }
  }
  if (std::isfinite(edge_sum) &&
      std::abs(edge_sum - population_sum) > 1e-9 * std::max(1.0, std::abs(edge_sum))) {
    throw std::logic_error("edge-sum and population-sum social costs disagree");
  }
  return edge_sum;
}

double relative_gap(const Network& net, const FlowDistribution& flow, Objective objective) {
  const auto costs = link_costs(net, flow.edge_loads, objective);
  return gap_from_costs(net, flow, costs, best_responses(net, costs));
}

FlowDistribution random_feasible_flow(const Network& net, std::uint64_t seed, std::size_t cap) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> weight(1.0);
  auto flow = FlowDistribution::empty(net);
  for (std::size_t i = 0; i < net.populations.size(); ++i) {
    std::vector<Path> open;
    for (auto& path : enumerate_paths(net, i, cap)) {
      if (std::none_of(path.begin(), path.end(), [&](auto e) { return is_blocked(net.edges[e].cost); })) {
        open.push_back(std::move(path));
      }
    }
    if (open.empty()) throw DomainError("population '" + net.populations[i].id + "' has no unblocked path");
    std::vector<double> w(open.size());
    for (auto& x : w) x = weight(rng);
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (std::size_t k = 0; k < open.size(); ++k) {
      if (net.populations[i].demand > 0.0) flow.add(net, i, open[k], net.populations[i].demand * w[k] / total);
    }
  }
  return flow;
}

EquilibriumResult solve_equilibrium(const Network& net, Objective objective, const SolverConfig& cfg,
                                    std::optional<FlowDistribution> init) {
  cfg.validate();
  EquilibriumResult result;
  result.objective = objective;

  FlowDistribution flow;
  if (init) {
    flow = std::move(*init);
    flow.edge_loads = flow.recompute_loads(net);
    const auto violations = feasibility_violations(net, flow);
    if (!violations.empty()) throw DomainError("infeasible initial flow: " + violations.front());
  } else {
    const auto zero = std::vector<double>(net.edges.size(), 0.0);
    flow = all_or_nothing(net, best_responses(net, link_costs(net, zero, objective)));
  }
  check_potential(result.potential_trace, potential(net, flow.edge_loads, objective));

  double gap = 0.0;
  std::size_t k = 0;
  for (;; ++k) {
    const auto costs = link_costs(net, flow.edge_loads, objective);
    const auto best = best_responses(net, costs);
    gap = gap_from_costs(net, flow, costs, best);
    if (gap <= cfg.tolerance || k >= cfg.max_iterations) break;

    // Frank-Wolfe step towards the all-or-nothing assignment.
    const auto target = all_or_nothing(net, best);
    std::vector<double> dir(net.edges.size());
    for (std::size_t e = 0; e < dir.size(); ++e) dir[e] = target.edge_loads[e] - flow.edge_loads[e];
    bool finite = true;
    double step = line_search(net, flow.edge_loads, dir, 1.0, objective, finite);
    if (!finite) step = 2.0 / (static_cast<double>(k) + 2.0);
    if (step > 0.0) {
      scale_flows(flow, 1.0 - step);
      for (std::size_t i = 0; i < net.populations.size(); ++i) {
        if (net.populations[i].demand > 0.0) flow.add(net, i, best[i], step * net.populations[i].demand);
      }
      drop_empty(flow);
      flow.edge_loads = flow.recompute_loads(net);
    }

    // Pairwise steps: costliest used path -> best response.
    if (cfg.pairwise_steps) {
      for (std::size_t i = 0; i < net.populations.size(); ++i) {
        const auto now = link_costs(net, flow.edge_loads, objective);
        const Path toward = shortest_path(net, now, net.populations[i]);
        const PathFlow* away = nullptr;
        double away_cost = -kInf;
        for (const auto& pf : flow.paths[i]) {
          const double c = sum_costs(now, pf.path);
          if (c > away_cost) {
            away_cost = c;
            away = &pf;
          }
        }
        if (!away || away->path == toward || !(away_cost > sum_costs(now, toward))) continue;
        const Path from = away->path;
        const double available = away->flow;
        std::vector<double> pdir(net.edges.size(), 0.0);
        for (std::size_t e : toward) pdir[e] += 1.0;
        for (std::size_t e : from) pdir[e] -= 1.0;
        bool ok = true;
        const double delta = line_search(net, flow.edge_loads, pdir, available, objective, ok);
        if (!ok || !(delta > 0.0)) continue;
        for (auto& pf : flow.paths[i]) {
          if (pf.path == from) pf.flow = delta >= available ? 0.0 : pf.flow - delta;
        }
        flow.add(net, i, toward, delta);
        drop_empty(flow);
        flow.edge_loads = flow.recompute_loads(net);
      }
    }
    check_potential(result.potential_trace, potential(net, flow.edge_loads, objective));
  }

  result.iterations = k;
  result.relative_gap = gap;
  result.converged = gap <= cfg.tolerance;
  result.social_cost = social_cost(net, flow);
  result.path_costs = report_paths(net, flow);
  result.flow = std::move(flow);
  return result;
}

EquilibriumResult solve_tlue(const Network& net, const SolverConfig& cfg, std::optional<FlowDistribution> init) {
  return solve_equilibrium(net, Objective::UserEquilibrium, cfg, std::move(init));
}

bool social_cost_convex(const Network& net) {
  const double upper = std::max(1.0, 2.0 * net.total_demand());
  constexpr int kPoints = 200;
  const double h = upper / kPoints;
  for (const auto& edge : net.edges) {
    if (is_blocked(edge.cost)) continue;
    auto total = [&](double x) { return x * eval_cost(edge.cost, x); };
    for (int i = 1; i < kPoints; ++i) {
      const double x = i * h;
      const double second = total(x + h) - 2.0 * total(x) + total(x - h);
      if (second < -1e-9 * std::max(1.0, std::abs(total(x)))) return false;
    }
  }
  return true;
}

EquilibriumResult solve_so(const Network& net, const SolverConfig& cfg) {
  if (!social_cost_convex(net)) return solve_so_projected(net, cfg);
  return solve_equilibrium(net, Objective::SystemOptimum, cfg);
}

namespace {

// Euclidean projection onto {x >= 0, sum x = total}.
std::vector<double> project_simplex(const std::vector<double>& v, double total) {
  std::vector<double> u = v;
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0, theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumulative += u[j];
    const double t = (cumulative - total) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  std::vector<double> x(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) x[j] = std::max(0.0, v[j] - theta);
  return x;
}

}  // namespace

EquilibriumResult solve_so_projected(const Network& net, const SolverConfig& cfg) {
  cfg.validate();
  std::vector<std::vector<Path>> paths(net.populations.size());
  std::vector<std::vector<double>> x(net.populations.size());
  for (std::size_t i = 0; i < net.populations.size(); ++i) {
    for (auto& path : enumerate_paths(net, i, cfg.path_cap)) {
      if (std::none_of(path.begin(), path.end(), [&](auto e) { return is_blocked(net.edges[e].cost); })) {
        paths[i].push_back(std::move(path));
      }
    }
    if (paths[i].empty()) throw DomainError("population '" + net.populations[i].id + "' has no unblocked path");
    x[i].assign(paths[i].size(), net.populations[i].demand / static_cast<double>(paths[i].size()));
  }
  auto build = [&](const std::vector<std::vector<double>>& values) {
    auto flow = FlowDistribution::empty(net);
    for (std::size_t i = 0; i < values.size(); ++i) {
      for (std::size_t k = 0; k < values[i].size(); ++k) {
        if (values[i][k] > 0.0) flow.add(net, i, paths[i][k], values[i][k]);
      }
    }
    return flow;
  };

  EquilibriumResult result;
  result.objective = Objective::SystemOptimum;
  result.nonconvex = true;
  auto flow = build(x);
  double sc = potential(net, flow.edge_loads, Objective::SystemOptimum);
  result.potential_trace.push_back(sc);
  double step = 1.0;
  std::size_t k = 0;
  double gap = relative_gap(net, flow, Objective::SystemOptimum);
  for (; gap > cfg.tolerance && k < cfg.max_iterations; ++k) {
    const auto marginal = link_costs(net, flow.edge_loads, Objective::SystemOptimum);
    bool improved = false;
    for (int tries = 0; tries < 60 && !improved; ++tries, step *= 0.5) {
      auto trial = x;
      for (std::size_t i = 0; i < x.size(); ++i) {
        std::vector<double> moved(x[i].size());
        for (std::size_t j = 0; j < x[i].size(); ++j) moved[j] = x[i][j] - step * sum_costs(marginal, paths[i][j]);
        trial[i] = project_simplex(moved, net.populations[i].demand);
      }
      auto trial_flow = build(trial);
      const double trial_sc = potential(net, trial_flow.edge_loads, Objective::SystemOptimum);
      if (trial_sc < sc) {
        x = std::move(trial);
        flow = std::move(trial_flow);
        sc = trial_sc;
        improved = true;
      }
    }
    if (!improved) break;
    step *= 4.0;
    result.potential_trace.push_back(sc);
    gap = relative_gap(net, flow, Objective::SystemOptimum);
  }
  result.iterations = k;
  result.relative_gap = gap;
  result.converged = gap <= cfg.tolerance;
  result.social_cost = social_cost(net, flow);
  result.path_costs = report_paths(net, flow);
  result.flow = std::move(flow);
  return result;
}

double price_of_anarchy(const Network& net, const SolverConfig& cfg) {
  const double ue = solve_tlue(net, cfg).social_cost;
  const double so = solve_so(net, cfg).social_cost;
  if (!(so > 0.0)) {
    if (ue > 0.0) return kInf;
    throw DomainError("price of anarchy undefined: optimal social cost is zero");
  }
  return ue / so;
}

bool satisfies_equilibrium_condition(const Network& net, const FlowDistribution& flow, double tol,
                                     Objective objective, double flow_floor) {
  const auto costs = link_costs(net, flow.edge_loads, objective);
  for (std::size_t i = 0; i < net.populations.size(); ++i) {
    const double cheapest = sum_costs(costs, shortest_path(net, costs, net.populations[i]));
    for (const auto& pf : flow.paths[i]) {
      if (pf.flow > flow_floor && sum_costs(costs, pf.path) > cheapest + tol * std::max(cheapest, 1e-12)) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace tlcg
