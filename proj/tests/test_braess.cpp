#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "support.hpp"
#include "tlcg/braess.hpp"

using namespace tlcg;
using testing::bundled;

TEST_CASE("detect_braess") {
  const auto report = detect_braess({bundled("braess_before"), bundled("braess")});
  CHECK(report.paradox);
  CHECK(report.baseline_cost == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(report.modified_cost == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(report.dominance.holds);
  CHECK(report.dominance.grid_holds);
  REQUIRE(report.dominance.symbolic_holds);
  CHECK(*report.dominance.symbolic_holds);

  CHECK_FALSE(detect_braess({bundled("braess"), bundled("braess")}).paradox);

  // halving the constant edge: UE cost drops from 1 to 1/2, no paradox
  const auto cheaper = detect_braess({testing::pigou(1.0), testing::pigou(0.5)});
  CHECK_FALSE(cheaper.paradox);
  CHECK(cheaper.baseline_cost == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(cheaper.modified_cost == doctest::Approx(0.5).epsilon(1e-5));

  // the reverse direction raises a cost, so it is not a valid pair
  CHECK_THROWS_AS(detect_braess({bundled("braess"), bundled("braess_before")}), DomainError);
  CHECK_THROWS_AS(detect_braess({testing::pigou(0.5), testing::pigou(1.0)}), DomainError);

  const auto j = braess_report_to_json(report);
  CHECK(j.at("paradox").get<bool>());
}

TEST_CASE("dominance symbolic check catches crossings the grid misses") {
  // 2t <= t + 2.05 only up to t = 2.05, just past the grid end 2 * demand
  auto base = testing::pigou();
  auto mod = base;
  base.edges[0].cost = testing::affine(1.0, 2.05);
  mod.edges[0].cost = testing::affine(2.0, 0.0);
  const auto check = check_dominance({base, mod});
  CHECK(check.grid_holds);  // grid stops at 2 * demand = 2
  REQUIRE(check.symbolic_holds);
  CHECK_FALSE(*check.symbolic_holds);
  CHECK_FALSE(check.holds);
}

TEST_CASE("immunize") {
  const auto fig3 = with_red_proportion(bundled("wheatstone_light"), 0.5);
  const auto exact = immunize(fig3, ImmunizationMode::Exact);
  REQUIRE(exact.suppressed.size() == 1);
  CHECK(fig3.edges[exact.suppressed[0]].id == "BC");
  CHECK(exact.immunity_guaranteed);
  CHECK(exact.game.edges[2].cost.p == 1.0);
  CHECK(is_blocked(exact.game.edges[2].cost));
  CHECK(solve_tlue(exact.game).social_cost == doctest::Approx(1.5).epsilon(1e-6));

  const auto sp = testing::pigou();
  const auto untouched = immunize(sp, ImmunizationMode::Exact);
  CHECK(untouched.suppressed.empty());
  CHECK(untouched.game == sp);

  const auto fig4 = immunize(bundled("fig4"), ImmunizationMode::Bounded, 0.85);
  CHECK_FALSE(fig4.immunity_guaranteed);
  REQUIRE(fig4.suppressed.size() == 4);
  for (auto e : fig4.suppressed) {
    CHECK(fig4.game.edges[e].to == "C");
    CHECK(fig4.game.edges[e].cost.p == 0.85);
  }
  CHECK_THROWS_AS(immunize(bundled("fig4"), ImmunizationMode::Bounded, 1.0), DomainError);
}

TEST_CASE("surviving edges follow the 1 / (v_in - v_hat) rule") {
  // closing A→B leaves B with one open entry (p = 0) and J with three (p = 1/3)
  auto net = testing::single_od(
      {"O", "A", "B", "J", "D"},
      {testing::edge("OA", "O", "A", testing::affine(1, 0)), testing::edge("OB", "O", "B", testing::affine(1, 0)),
       testing::edge("AB", "A", "B", testing::affine(0, 0)), testing::edge("AJ", "A", "J", testing::affine(1, 0)),
       testing::edge("BJ", "B", "J", testing::affine(1, 0)), testing::edge("OJ", "O", "J", testing::affine(0, 2)),
       testing::edge("JD", "J", "D", testing::affine(1, 0))});
  net = validate_network(net);
  const auto r = immunize(net, ImmunizationMode::Exact);
  REQUIRE(r.suppressed.size() == 1);
  CHECK(net.edges[r.suppressed[0]].id == "AB");
  for (const auto& e : r.game.edges) {
    if (e.to == "J") CHECK(e.cost.p == doctest::Approx(1.0 / 3.0));
    if (e.id == "OB") CHECK(e.cost.p == 0.0);
    if (!e.has_light) CHECK(e.cost.p == 0.0);
  }
}

TEST_CASE("exact immunization equals the equilibrium of the series-parallel part") {
  std::mt19937_64 rng(99);
  int checked = 0;
  for (int k = 0; k < 80 && checked < 15; ++k) {
    const auto g = testing::random_two_terminal(rng, 4, 2 + k % 4);
    if (g.edges.size() > 12 || testing::oracle_series_parallel(g, {})) continue;
    ImmunizationResult r;
    try {
      r = immunize(g, ImmunizationMode::Exact);
    } catch (const DomainError&) {
      continue;
    }
    // oracle: drop the closed edges and solve what is left
    Network sub = g;
    std::vector<Edge> kept;
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      if (std::find(r.suppressed.begin(), r.suppressed.end(), e) == r.suppressed.end()) kept.push_back(g.edges[e]);
    }
    sub.edges = kept;
    for (auto& e : sub.edges) e.has_light = false;
    sub = validate_network(sub);
    CHECK(testing::oracle_series_parallel(sub, {}));
    CHECK(solve_tlue(r.game).social_cost == doctest::Approx(solve_tlue(sub).social_cost).epsilon(1e-5));
    ++checked;
  }
  CHECK(checked >= 10);
}

TEST_CASE("closed-form Wheatstone optimum") {
  CHECK(wheatstone_so_flow(0).x == 0.5);
  CHECK(wheatstone_so_flow(0).y == 0.5);
  CHECK(wheatstone_so_flow(1).x == doctest::Approx(0.7310585786).epsilon(1e-9));
  for (double p : {0.0, 0.2, 0.6, 1.0}) {
    const auto f = wheatstone_so_flow(p);
    CHECK(f.x == f.y);
    // restricted to no middle flow the objective is x^2 + 1 + (1 - x)^2 e^p
    double best = 1e9, arg = 0;
    for (int i = 0; i <= 1000; ++i) {
      const double x = i / 1000.0;
      const double sc = x * x + 1 + (1 - x) * (1 - x) * std::exp(p);
      if (sc < best) best = sc, arg = x;
    }
    CHECK(std::abs(arg - f.x) <= 2e-3);
    CHECK(wheatstone_social_cost(p, f.x, f.y) == doctest::Approx(best).epsilon(1e-5));
  }
  // only at p = 0 is it the unrestricted optimum
  CHECK(wheatstone_tlue(0.0).sc_so == doctest::Approx(1.5).epsilon(1e-9));
  for (double p : {0.3, 0.6, 0.9}) {
    const auto f = wheatstone_so_flow(p);
    CHECK(wheatstone_tlue(p).sc_so < wheatstone_social_cost(p, f.x, f.y) - 1e-4);
  }
}

TEST_CASE("Wheatstone equilibrium") {
  const auto p0 = wheatstone_tlue(0.0);
  // m = 1/(2e - 1) on the middle path, (e - 1)/(2e - 1) on each outer one
  CHECK(p0.sc_tlue == doctest::Approx(1.612699836780).epsilon(1e-10));
  CHECK(p0.mid_flow() == doctest::Approx(0.2253996735605641).epsilon(1e-9));
  CHECK(p0.y == doctest::Approx(0.38730016321971794).epsilon(1e-9));
  CHECK(p0.so_x == doctest::Approx(0.5).epsilon(1e-9));

  for (double p : {0.0, 0.1, 0.35, 0.5, 0.7, 0.85, 0.95}) {
    const auto w = wheatstone_tlue(p);
    CHECK(0.0 <= w.y);
    CHECK(w.y <= w.x);
    CHECK(w.x <= 1.0);
    CHECK(w.mid_flow() > 0.0);
    CHECK(w.sc_tlue < 2.0);
    CHECK(w.sc_so <= w.sc_tlue);
    const auto net = with_red_proportion(bundled("wheatstone_light"), p);
    SolverConfig tight;
    tight.tolerance = 1e-10;
    CHECK(solve_tlue(net, tight).social_cost == doctest::Approx(w.sc_tlue).epsilon(1e-6));
    CHECK(solve_so(net, tight).social_cost == doctest::Approx(w.sc_so).epsilon(1e-6));
  }
  CHECK_THROWS_AS(wheatstone_tlue(1.0), DomainError);
}

TEST_CASE("p sweeps") {
  const auto grid = linspace(0.0, 0.9, 10);
  REQUIRE(grid.size() == 10);
  CHECK(grid[3] == doctest::Approx(0.3));
  CHECK(grid.back() == 0.9);
  CHECK_THROWS_AS(linspace(0, 1, 0), DomainError);

  const auto sweep = sweep_p(bundled("wheatstone_light"), grid);
  CHECK(sweep.sc_tlue_increasing);
  CHECK(sweep.sc_so_increasing);
  CHECK(sweep.points[0].sc_so == doctest::Approx(1.5).epsilon(1e-6));
  const auto direct = sweep_wheatstone(grid);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    CHECK(sweep.points[k].p == grid[k]);
    CHECK(sweep.points[k].converged);
    CHECK(sweep.points[k].sc_tlue == doctest::Approx(direct[k].sc_tlue).epsilon(1e-6));
    REQUIRE(sweep.points[k].mid_flow);
    CHECK(*sweep.points[k].mid_flow == doctest::Approx(direct[k].mid_flow()).epsilon(1e-4));
  }
  std::istringstream csv(sweep_to_csv(sweep));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "p,sc_tlue,sc_so,poa,x,y,mid_flow");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 10);
}
