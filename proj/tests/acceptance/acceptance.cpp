// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "tlcg/braess.hpp"
#include "tlcg/equilibrium.hpp"
#include "tlcg/lightsim.hpp"

using namespace tlcg;
using testing::bundled;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Outcome classic_braess() {
  auto t0 = std::chrono::steady_clock::now();
  const double before = solve_tlue(bundled("braess_before")).social_cost;
  const double t_before = seconds_since(t0);
  t0 = std::chrono::steady_clock::now();
  const double after = solve_tlue(bundled("braess")).social_cost;
  const double t_after = seconds_since(t0);
  const bool ok = std::abs(before - 1.5) <= 1e-4 && std::abs(after - 2.0) <= 1e-4 && t_before < 1 && t_after < 1;
  return {ok, fmt("SC without middle edge %.10f (%.3fs), with it %.10f (%.3fs)", before, t_before, after, t_after)};
}

Outcome braess_detection() {
  const auto r = detect_braess({bundled("braess_before"), bundled("braess")});
  const bool ok = r.paradox && std::abs(r.baseline_cost - 1.5) <= 1e-4 && std::abs(r.modified_cost - 2.0) <= 1e-4;
  return {ok, fmt("paradox=%s, %.10f < %.10f", r.paradox ? "true" : "false", r.baseline_cost, r.modified_cost)};
}

Outcome classic_poa() {
  const double poa = price_of_anarchy(bundled("braess"));
  return {std::abs(poa - 4.0 / 3.0) <= 1e-3, fmt("PoA %.10f", poa)};
}

Outcome so_closed_form() {
  const auto tmpl = bundled("wheatstone_light");
  const auto layout = *find_wheatstone_layout(tmpl);
  double worst = 0.0, worst_p = 0.0;
  std::string at_zero;
  bool zero_ok = false;
  for (int k = 0; k <= 9; ++k) {
    const double p = k / 10.0;
    SolverConfig cfg;
    cfg.tolerance = 1e-10;
    const auto so = solve_so(with_red_proportion(tmpl, p), cfg);
    const auto formula = wheatstone_so_flow(p);
    const double dx = std::abs(so.flow.edge_loads[layout.top_in] - formula.x);
    const double dy = std::abs(so.flow.edge_loads[layout.top_out] - formula.y);
    if (std::max(dx, dy) > worst) worst = std::max(dx, dy), worst_p = p;
    if (k == 0) {
      zero_ok = std::abs(so.flow.edge_loads[layout.top_in] - 0.5) <= 1e-6 &&
                std::abs(so.flow.edge_loads[layout.top_out] - 0.5) <= 1e-6 && std::abs(so.social_cost - 1.5) <= 1e-6;
      at_zero = fmt("p=0: x=%.8f y=%.8f SC_SO=%.10f", so.flow.edge_loads[layout.top_in],
                    so.flow.edge_loads[layout.top_out], so.social_cost);
    }
  }
  return {zero_ok && worst <= 1e-3,
          at_zero + fmt("; max |flow - e^p/(1+e^p)| = %.4f at p=%.1f (limit 1e-3)", worst, worst_p)};
}

Outcome reductions() {
  const auto tmpl = bundled("wheatstone_light");
  SolverConfig cfg;
  cfg.tolerance = 1e-10;
  const double near_one = solve_tlue(with_red_proportion(tmpl, 1 - 1e-3), cfg).social_cost;
  const double bound = solve_tlue(with_red_proportion(tmpl, 0.85), cfg).social_cost;
  const double r1 = (2.0 - near_one) / 2.0, r2 = (2.0 - bound) / 2.0;
  const bool ok = std::abs(r1 - 0.24) <= 0.02 && std::abs(r2 - 0.22) <= 0.02;
  return {ok, fmt("reduction at p=0.999: %.2f%% (SC %.6f, want 24±2%%); at p=0.85: %.2f%% (SC %.6f, want 22±2%%)",
                  100 * r1, near_one, 100 * r2, bound)};
}

Outcome poa_interval() {
  const auto sweep = sweep_p(bundled("wheatstone_light"), linspace(0.15, 0.85, 15));
  double lo = 1e9, hi = 0, hi_p = 0;
  for (const auto& pt : sweep.points) {
    lo = std::min(lo, pt.poa);
    if (pt.poa > hi) hi = pt.poa, hi_p = pt.p;
  }
  return {lo >= 1.05 && hi <= 1.17, fmt("PoA range [%.4f, %.4f], max at p=%.2f (want within [1.05, 1.17])", lo, hi, hi_p)};
}

Outcome monotone() {
  const auto sweep = sweep_p(bundled("wheatstone_light"), linspace(0.0, 0.9, 10));
  return {sweep.sc_tlue_increasing && sweep.sc_so_increasing,
          fmt("SC_TLUE %.6f -> %.6f, SC_SO %.6f -> %.6f, strictly increasing: %s/%s", sweep.points.front().sc_tlue,
              sweep.points.back().sc_tlue, sweep.points.front().sc_so, sweep.points.back().sc_so,
              sweep.sc_tlue_increasing ? "yes" : "no", sweep.sc_so_increasing ? "yes" : "no")};
}

Outcome immunization() {
  const auto fig3 = with_red_proportion(bundled("wheatstone_light"), 0.5);
  const auto exact = immunize(fig3, ImmunizationMode::Exact);
  const bool blocks_bc = exact.suppressed.size() == 1 && fig3.edges[exact.suppressed[0]].id == "BC" &&
                         is_blocked(exact.game.edges[exact.suppressed[0]].cost);
  const double sc = solve_tlue(exact.game).social_cost;
  const auto fig4 = immunize(bundled("fig4"), ImmunizationMode::Bounded, 0.85);
  const bool ok = blocks_bc && std::abs(sc - 1.5) <= 1e-4 && !fig4.immunity_guaranteed;
  return {ok, fmt("Wheatstone exact: B→C blocked=%s, SC %.10f; four-shortcut net bounded: %zu edges at 0.85, immunity=%s",
                  blocks_bc ? "yes" : "no", sc, fig4.suppressed.size(), fig4.immunity_guaranteed ? "true" : "false")};
}

Outcome uniqueness() {
  const auto net = with_red_proportion(bundled("wheatstone_light"), 0.5);
  double lo = 1e9, hi = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const double sc = solve_tlue(net, {}, random_feasible_flow(net, seed)).social_cost;
    lo = std::min(lo, sc);
    hi = std::max(hi, sc);
  }
  const double spread = (hi - lo) / lo;
  return {spread <= 1e-4, fmt("10 random starts: SC in [%.10f, %.10f], relative spread %.2e", lo, hi, spread)};
}

Outcome grid_oracle() {
  std::mt19937_64 rng(20240611);
  double worst = 0.0;
  for (int k = 0; k < 50; ++k) {
    const auto g = testing::random_small_game(rng);
    const double oracle = testing::grid_search_ue_cost(g);
    const double sc = solve_tlue(g.net).social_cost;
    worst = std::max(worst, std::abs(sc - oracle) / std::max(oracle, 1e-12));
  }
  return {worst <= 1e-2, fmt("50 random 2-3 path games: max relative SC difference %.2e", worst)};
}

Outcome gradient() {
  std::mt19937_64 rng(1000);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    EdgeCost ec;
    switch (k % 5) {
      case 0: ec = {Affine{2 * u(rng), 3 * u(rng)}, WaitingFamily::Zero, 0}; break;
      case 1: ec = {Affine{2 * u(rng), 3 * u(rng)}, WaitingFamily::SimpleExponential, u(rng)}; break;
      case 2: ec = {Affine{0.4, 44}, WaitingFamily::SumoFitted, 0.85 * u(rng)}; break;
      case 3: ec = {Constant{3 * u(rng)}, WaitingFamily::Blocking, 0.99 * u(rng)}; break;
      default: ec = {Polynomial{{u(rng), u(rng), u(rng), u(rng)}}, WaitingFamily::SimpleExponential, u(rng)}; break;
    }
    const double f = 0.01 + 10 * u(rng), h = 1e-4;
    const double fd = (integral_cost(ec, f + h) - integral_cost(ec, f - h)) / (2 * h);
    const double c = eval_cost(ec, f);
    worst = std::max(worst, std::abs(fd - c) / std::max(1.0, std::abs(c)));
  }
  return {worst <= 1e-6, fmt("1000 samples: max |d/df integral - cost| / max(1, cost) = %.2e", worst)};
}

Outcome lightsim_grid() {
  const auto grid = default_grid();
  const auto rep = correlation_report(grid);
  bool zero = true;
  for (const auto& c : grid) {
    if (c.p == 0.0 && c.result.mean_wait != 0.0) zero = false;
  }
  const bool ok = rep.rho_p > 0.9 && std::abs(rep.rho_T) < 0.3 && zero;
  return {ok, fmt("%zu cells: rho(p, wait) %.4f, rho(T, wait) %.4f, p=0 wait zero: %s", rep.cells, rep.rho_p, rep.rho_T,
                  zero ? "yes" : "no")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"classic Braess reproduction", classic_braess},
      {"Braess detection", braess_detection},
      {"classic price of anarchy", classic_poa},
      {"Wheatstone SO closed form", so_closed_form},
      {"24% / 22% reduction claims", reductions},
      {"PoA interval", poa_interval},
      {"SC monotone in p", monotone},
      {"immunization", immunization},
      {"essential uniqueness", uniqueness},
      {"grid-oracle equivalence", grid_oracle},
      {"integral gradient check", gradient},
      {"lightsim qualitative reproduction", lightsim_grid},
  };
  const auto t0 = std::chrono::steady_clock::now();
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
  }
  std::printf("%zu/%zu criteria passed in %.1fs\n", criteria.size() - failed, criteria.size(), seconds_since(t0));
  return failed ? 1 : 0;
}
