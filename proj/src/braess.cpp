#include "tlcg/braess.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "tlcg/report.hpp"

namespace tlcg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<std::string> structure_differences(const GamePair& pair) {
  std::vector<std::string> out;
  const auto& a = pair.baseline;
  const auto& b = pair.modified;
  if (a.nodes != b.nodes) out.push_back("node sets differ");
  if (a.edges.size() != b.edges.size()) {
    out.push_back("edge sets differ");
  } else {
    for (std::size_t e = 0; e < a.edges.size(); ++e) {
      if (a.edges[e].id != b.edges[e].id || a.edges[e].from != b.edges[e].from || a.edges[e].to != b.edges[e].to) {
        out.push_back("edge " + std::to_string(e) + " differs between games");
      }
    }
  }
  if (a.populations.size() != b.populations.size()) {
    out.push_back("population sets differ");
  } else {
    for (std::size_t i = 0; i < a.populations.size(); ++i) {
      const auto& p = a.populations[i];
      const auto& q = b.populations[i];
      if (p.id != q.id || p.origin != q.origin || p.destination != q.destination) {
        out.push_back("population '" + p.id + "' has a different strategy system");
      }
    }
  }
  return out;
}

// Is max(0, lower(t)) <= max(0, upper(t)) for every t >= 0?
bool clamped_line_dominated(std::pair<double, double> lower, std::pair<double, double> upper) {
  const auto [a1, b1] = lower;
  const auto [a2, b2] = upper;
  auto low = [&](double t) { return a1 * t + b1; };
  const double ga = a1 - a2, gb = b1 - b2;  // lower - upper
  // Region where lower exceeds upper, intersected with t >= 0.
  if (ga == 0.0) {
    if (gb <= 0.0) return true;
    return !(a1 > 0.0 || b1 > 0.0);
  }
  const double root = -gb / ga;
  if (ga > 0.0) {  // (max(root, 0), inf)
    if (a1 > 0.0) return false;
    return !(low(std::max(root, 0.0)) > 0.0);
  }
  if (root <= 0.0) return true;  // [0, root)
  return !(low(0.0) > 0.0 || low(root) > 0.0);
}

// Nested bisection for the 3-path Wheatstone game. Path flows: a on
// O→B→D, b on O→C→D, m on O→B→C→D.
struct WheatstoneSolution {
  double a, b, m;
};

struct WheatstoneCosts {
  double p;
  bool marginal;
  double k2, k3;  // waiting slopes on O→C and B→C

  WheatstoneCosts(double p_, bool marginal_)
      : p(p_), marginal(marginal_), k2(std::exp(p_) - 1.0), k3(std::exp(1.0 - p_) - 1.0) {}

  double top_in(double z) const { return marginal ? 2.0 * z : z; }
  double bottom_in(double z) const { return 1.0 + (marginal ? 2.0 : 1.0) * k2 * z; }
  double middle(double z) const { return (marginal ? 2.0 : 1.0) * k3 * z; }
  double top_out(double) const { return 1.0; }
  double bottom_out(double z) const { return marginal ? 2.0 * z : z; }

  double upper(const WheatstoneSolution& s) const { return top_in(s.a + s.m) + top_out(s.a); }
  double lower(const WheatstoneSolution& s) const { return bottom_in(s.b) + bottom_out(s.b + s.m); }
  double zigzag(const WheatstoneSolution& s) const {
    return top_in(s.a + s.m) + middle(s.m) + bottom_out(s.b + s.m);
  }
};

double bisect(double lo, double hi, const auto& increasing) {
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (increasing(mid) <= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

WheatstoneSolution solve_wheatstone(const WheatstoneCosts& c, double d) {
  // Split d - m between the two outer paths.
  auto split = [&](double m) {
    const double rest = d - m;
    auto diff = [&](double a) {
      const WheatstoneSolution s{a, rest - a, m};
      return c.upper(s) - c.lower(s);
    };
    double a;
    if (rest <= 0.0) {
      a = 0.0;
    } else if (diff(0.0) >= 0.0) {
      a = 0.0;
    } else if (diff(rest) <= 0.0) {
      a = rest;
    } else {
      a = bisect(0.0, rest, diff);
    }
    return WheatstoneSolution{a, std::max(0.0, rest - a), m};
  };
  auto outer = [&](double m) {
    const auto s = split(m);
    double used;
    if (d - m <= 0.0) {
      used = std::min(c.upper(s), c.lower(s));
    } else {
      used = s.b > 0.0 ? c.lower(s) : c.upper(s);
    }
    return c.zigzag(s) - used;
  };
  if (outer(0.0) >= 0.0) return split(0.0);
  if (outer(d) <= 0.0) return split(d);
  return split(bisect(0.0, d, outer));
}

double wheatstone_cost_of(double p, const WheatstoneSolution& s) {
  const WheatstoneCosts c(p, false);
  const double x = s.a + s.m;
  return x * c.top_in(x) + s.b * c.bottom_in(s.b) + s.m * c.middle(s.m) + s.a * c.top_out(s.a) +
         (s.b + s.m) * c.bottom_out(s.b + s.m);
}

}  // namespace

DominanceCheck check_dominance(const GamePair& pair, std::size_t grid_points) {
  DominanceCheck check;
  check.violations = structure_differences(pair);
  if (!check.violations.empty()) return check;

  const auto& base = pair.baseline;
  const auto& mod = pair.modified;
  for (std::size_t i = 0; i < base.populations.size(); ++i) {
    if (mod.populations[i].demand > base.populations[i].demand) {
      check.violations.push_back("demand of '" + base.populations[i].id + "' increases");
    }
  }

  const double upper = 2.0 * base.total_demand();
  check.grid_holds = true;
  for (std::size_t e = 0; e < base.edges.size(); ++e) {
    for (std::size_t k = 0; k < grid_points; ++k) {
      const double t = grid_points > 1 ? upper * static_cast<double>(k) / static_cast<double>(grid_points - 1) : 0.0;
      const double c = eval_cost(base.edges[e].cost, t);
      const double c_mod = eval_cost(mod.edges[e].cost, t);
      if (c_mod > c + 1e-12 * std::max(1.0, std::abs(c))) {
        check.grid_holds = false;
        check.violations.push_back("edge '" + base.edges[e].id + "' costs more in the modified game at t=" +
                                   format_number(t));
        break;
      }
    }
  }

  bool all_affine = true, symbolic = true;
  for (std::size_t e = 0; e < base.edges.size(); ++e) {
    const bool blocked = is_blocked(base.edges[e].cost);
    const bool blocked_mod = is_blocked(mod.edges[e].cost);
    if (blocked) continue;  // anything is below +inf
    if (blocked_mod) {
      symbolic = false;
      continue;
    }
    const auto line = affine_coefficients(base.edges[e].cost);
    const auto line_mod = affine_coefficients(mod.edges[e].cost);
    if (!line || !line_mod) {
      all_affine = false;
      continue;
    }
    if (!clamped_line_dominated(*line_mod, *line)) {
      symbolic = false;
      check.violations.push_back("edge '" + base.edges[e].id + "' is not dominated for all t >= 0");
    }
  }
  if (all_affine) check.symbolic_holds = symbolic;

  check.holds = check.violations.empty();
  return check;
}

BraessReport detect_braess(const GamePair& pair, const SolverConfig& cfg) {
  BraessReport report;
  report.dominance = check_dominance(pair);
  if (!report.dominance.holds) {
    std::string msg = "dominance check failed";
    for (const auto& v : report.dominance.violations) msg += "; " + v;
    throw DomainError(msg);
  }
  const auto baseline = solve_tlue(pair.baseline, cfg);
  const auto modified = solve_tlue(pair.modified, cfg);
  if (!baseline.converged || !modified.converged) throw DomainError("equilibrium solve did not converge");
  report.baseline_cost = baseline.social_cost;
  report.modified_cost = modified.social_cost;
  const double margin = 10.0 * cfg.tolerance * std::max(1.0, std::abs(report.modified_cost));
  report.paradox = report.baseline_cost < report.modified_cost - margin;
  return report;
}

nlohmann::json braess_report_to_json(const BraessReport& report) {
  nlohmann::json j{{"baseline_social_cost", round_significant(report.baseline_cost)},
                   {"modified_social_cost", round_significant(report.modified_cost)},
                   {"paradox", report.paradox},
                   {"dominance", {{"holds", report.dominance.holds}, {"grid", report.dominance.grid_holds}}}};
  if (report.dominance.symbolic_holds) {
    j["dominance"]["symbolic"] = *report.dominance.symbolic_holds;
  } else {
    j["dominance"]["symbolic"] = nullptr;
  }
  j["dominance"]["violations"] = report.dominance.violations;
  return j;
}

ImmunizationResult immunize(const Network& net, ImmunizationMode mode, double p_max) {
  if (mode == ImmunizationMode::Bounded && !(p_max >= 0.0 && p_max < 1.0)) {
    throw DomainError("bounded immunization needs 0 <= p_max < 1");
  }
  const auto [origin, destination] = terminal_pair(net);
  Network game = place_lights(net);
  const auto sp = max_sp_subgraph(game);

  std::vector<std::string> unlit;
  for (std::size_t e : sp.removed) {
    if (!game.edges[e].has_light) unlit.push_back(game.edge_label(e));
  }
  if (!unlit.empty()) {
    std::string msg = "edges to suppress end without a traffic light:";
    for (const auto& label : unlit) msg += " " + label;
    throw DomainError(msg);
  }

  std::vector<bool> suppressed(game.edges.size(), false);
  for (std::size_t e : sp.removed) suppressed[e] = true;

  for (std::size_t e = 0; e < game.edges.size(); ++e) {
    auto& edge = game.edges[e];
    if (!edge.has_light) continue;
    edge.phase_role = PhaseRole::Fixed;
    if (suppressed[e]) {
      if (mode == ImmunizationMode::Exact) {
        edge.cost.waiting = WaitingFamily::Blocking;
        edge.cost.p = 1.0;
      } else {
        if (edge.cost.waiting == WaitingFamily::Zero) edge.cost.waiting = WaitingFamily::SimpleExponential;
        edge.cost.p = p_max;
      }
      continue;
    }
    const std::size_t in = game.in_degree(edge.to);
    std::size_t in_suppressed = 0;
    for (std::size_t f : sp.removed) {
      if (game.edges[f].to == edge.to) ++in_suppressed;
    }
    const std::size_t open = in - in_suppressed;
    edge.cost.p = open > 1 ? 1.0 / static_cast<double>(open) : 0.0;
  }
  game = validate_network(std::move(game));

  ImmunizationResult result;
  result.suppressed = sp.removed;
  result.heuristic = sp.heuristic;
  if (mode == ImmunizationMode::Exact) {
    std::vector<bool> open(game.edges.size(), true);
    for (std::size_t e = 0; e < game.edges.size(); ++e) open[e] = !is_blocked(game.edges[e].cost);
    if (!series_parallel_check(game, origin, destination, open).series_parallel) {
      throw std::logic_error("immunized network is not series-parallel");
    }
    result.immunity_guaranteed = true;
  }
  result.game = std::move(game);
  return result;
}

WheatstoneFlows wheatstone_so_flow(double p) {
  const double share = std::exp(p) / (1.0 + std::exp(p));
  return {share, share};
}

double wheatstone_social_cost(double p, double x, double y, double demand) {
  return wheatstone_cost_of(p, WheatstoneSolution{y, demand - x, x - y});
}

WheatstonePoint wheatstone_tlue(double p, double demand) {
  if (!(p >= 0.0 && p < 1.0)) throw DomainError("wheatstone_tlue requires 0 <= p < 1");
  if (!(demand >= 0.0)) throw DomainError("demand must be non-negative");
  WheatstonePoint point;
  point.p = p;
  const auto ue = solve_wheatstone(WheatstoneCosts(p, false), demand);
  const auto so = solve_wheatstone(WheatstoneCosts(p, true), demand);
  point.x = ue.a + ue.m;
  point.y = ue.a;
  point.sc_tlue = wheatstone_cost_of(p, ue);
  point.so_x = so.a + so.m;
  point.so_y = so.a;
  point.sc_so = wheatstone_cost_of(p, so);
  point.poa = point.sc_so > 0.0 ? point.sc_tlue / point.sc_so : 1.0;
  return point;
}

std::optional<WheatstoneLayout> find_wheatstone_layout(const Network& net) {
  if (net.nodes.size() != 4 || net.edges.size() != 5) return std::nullopt;
  std::pair<std::string, std::string> od;
  try {
    od = terminal_pair(net);
  } catch (const DomainError&) {
    return std::nullopt;
  }
  const auto& [o, d] = od;
  for (std::size_t mid = 0; mid < net.edges.size(); ++mid) {
    const auto& u = net.edges[mid].from;
    const auto& v = net.edges[mid].to;
    if (u == o || u == d || v == o || v == d) continue;
    const auto top_in = net.find_edge(o, u);
    const auto bottom_in = net.find_edge(o, v);
    const auto top_out = net.find_edge(u, d);
    const auto bottom_out = net.find_edge(v, d);
    if (top_in && bottom_in && top_out && bottom_out) {
      return WheatstoneLayout{*top_in, *bottom_in, mid, *top_out, *bottom_out};
    }
  }
  return std::nullopt;
}

Network with_red_proportion(Network net, double p) {
  for (auto& edge : net.edges) {
    if (edge.phase_role == PhaseRole::Primary) edge.cost.p = p;
    if (edge.phase_role == PhaseRole::Complement) edge.cost.p = 1.0 - p;
  }
  for (const auto& edge : net.edges) check_red_proportion(edge.cost.waiting, edge.cost.p);
  return net;
}

std::vector<double> linspace(double from, double to, std::size_t steps) {
  if (steps == 0) throw DomainError("grid needs at least one step");
  std::vector<double> grid(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    grid[k] = steps == 1 ? from : from + (to - from) * static_cast<double>(k) / static_cast<double>(steps - 1);
  }
  if (steps > 1) grid.back() = to;
  return grid;
}

namespace {

bool strictly_increasing(const std::vector<double>& values) {
  for (std::size_t k = 1; k < values.size(); ++k) {
    if (!(values[k] > values[k - 1])) return false;
  }
  return true;
}

template <typename T, typename F>
std::vector<T> parallel_map(const std::vector<double>& grid, F&& task) {
  std::vector<std::future<T>> futures;
  futures.reserve(grid.size());
  for (double value : grid) futures.push_back(std::async(std::launch::async, task, value));
  std::vector<T> out;
  out.reserve(grid.size());
  for (auto& f : futures) out.push_back(f.get());
  return out;
}

}  // namespace

SweepResult sweep_p(const Network& template_net, const std::vector<double>& grid, const SolverConfig& cfg) {
  const auto layout = find_wheatstone_layout(template_net);
  SweepResult result;
  result.points = parallel_map<SweepPoint>(grid, [&](double p) {
    const Network net = with_red_proportion(template_net, p);
    const auto ue = solve_tlue(net, cfg);
    const auto so = solve_so(net, cfg);
    SweepPoint point;
    point.p = p;
    point.sc_tlue = ue.social_cost;
    point.sc_so = so.social_cost;
    point.poa = so.social_cost > 0.0 ? ue.social_cost / so.social_cost : (ue.social_cost > 0.0 ? kInf : 1.0);
    point.converged = ue.converged && so.converged;
    if (layout) {
      point.x = ue.flow.edge_loads[layout->top_in];
      point.y = ue.flow.edge_loads[layout->top_out];
      point.mid_flow = ue.flow.edge_loads[layout->middle];
    }
    return point;
  });
  std::vector<double> tlue, so;
  for (const auto& point : result.points) {
    tlue.push_back(point.sc_tlue);
    so.push_back(point.sc_so);
  }
  result.sc_tlue_increasing = strictly_increasing(tlue);
  result.sc_so_increasing = strictly_increasing(so);
  return result;
}

std::vector<WheatstonePoint> sweep_wheatstone(const std::vector<double>& grid, double demand) {
  return parallel_map<WheatstonePoint>(grid, [demand](double p) { return wheatstone_tlue(p, demand); });
}

std::string sweep_to_csv(const SweepResult& sweep) {
  std::ostringstream out;
  out << "p,sc_tlue,sc_so,poa,x,y,mid_flow\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  for (const auto& point : sweep.points) {
    out << format_number(point.p) << ',' << format_number(point.sc_tlue) << ',' << format_number(point.sc_so) << ','
        << format_number(point.poa) << ',' << opt(point.x) << ',' << opt(point.y) << ',' << opt(point.mid_flow)
        << '\n';
  }
  return out.str();
}

}  // namespace tlcg
