#include "tlcg/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include "tlcg/braess.hpp"
#include "tlcg/equilibrium.hpp"
#include "tlcg/lightsim.hpp"
#include "tlcg/network_io.hpp"
#include "tlcg/report.hpp"

namespace tlcg::cli {

using nlohmann::json;

namespace {

enum class Format { Default, Table, Csv, Json };

struct Globals {
  std::string network;
  std::string out;
  Format format = Format::Default;
  double tol = 1e-6;
  std::size_t max_iter = 10000;
  std::uint64_t seed = 0;

  SolverConfig solver() const {
    SolverConfig cfg;
    cfg.tolerance = tol;
    cfg.max_iterations = max_iter;
    cfg.seed = seed;
    cfg.validate();
    return cfg;
  }
  Format pick(Format fallback) const { return format == Format::Default ? fallback : format; }
};

// fixed 10 decimals for humans
std::string fixed(double v) {
  if (!std::isfinite(v)) return format_number(v);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10f", v == 0.0 ? 0.0 : v);
  return buf;
}

json num(double v) {
  if (std::isfinite(v)) return round_significant(v);
  return format_number(v);
}

Network need_network(const Globals& g) {
  if (g.network.empty()) throw CLI::RequiredError("--network");
  return load_network(g.network);
}

std::string cmd_solve(const Globals& g, const std::string& kind) {
  const Network net = need_network(g);
  const auto cfg = g.solver();
  const auto result = kind == "ue" ? solve_tlue(net, cfg) : solve_so(net, cfg);
  if (!result.converged) {
    throw DomainError("solver did not converge within " + std::to_string(cfg.max_iterations) +
                      " iterations (relative gap " + format_number(result.relative_gap) + ")");
  }
  switch (g.pick(Format::Table)) {
    case Format::Json:
      return result_to_json(net, result).dump(2) + "\n";
    case Format::Csv:
      return result_to_csv(net, result);
    default: {
      std::ostringstream os;
      os << "SC " << fixed(result.social_cost) << "\n";
      for (const auto& pc : result.path_costs) {
        if (pc.flow <= 0.0) continue;
        os << net.populations[pc.population].id << "  " << path_label(net, pc.path) << "  flow " << fixed(pc.flow)
           << "  cost " << fixed(pc.cost) << "\n";
      }
      return os.str();
    }
  }
}

std::string cmd_poa(const Globals& g) {
  const Network net = need_network(g);
  const auto cfg = g.solver();
  const auto ue = solve_tlue(net, cfg);
  const auto so = solve_so(net, cfg);
  const double poa = price_of_anarchy(net, cfg);
  switch (g.pick(Format::Table)) {
    case Format::Json:
      return json{{"sc_tlue", num(ue.social_cost)}, {"sc_so", num(so.social_cost)}, {"poa", num(poa)}}.dump(2) + "\n";
    case Format::Csv:
      return "sc_tlue,sc_so,poa\n" + format_number(ue.social_cost) + "," + format_number(so.social_cost) + "," +
             format_number(poa) + "\n";
    default:
      return "SC_TLUE " + fixed(ue.social_cost) + "\nSC_SO " + fixed(so.social_cost) + "\nPoA " + fixed(poa) + "\n";
  }
}

std::string cmd_sp_check(const Globals& g) {
  const Network net = need_network(g);
  const auto verdict = is_series_parallel(net);
  std::vector<std::string> witness;
  if (!verdict.series_parallel) {
    for (std::size_t e : max_sp_subgraph(net).removed) witness.push_back(net.edge_label(e));
  }
  auto joined = [&](const char* sep) {
    std::string s;
    for (std::size_t i = 0; i < witness.size(); ++i) s += (i ? sep : "") + witness[i];
    return s;
  };
  switch (g.pick(Format::Table)) {
    case Format::Json: {
      json trace = json::array();
      for (const auto& step : verdict.trace) {
        trace.push_back({{"kind", step.kind == ReductionStep::Kind::Parallel ? "parallel" : "series"},
                         {"detail", step.detail}});
      }
      return json{{"series_parallel", verdict.series_parallel},
                  {"residual_edges", verdict.residual_edges},
                  {"witness", witness},
                  {"trace", trace}}
                 .dump(2) +
             "\n";
    }
    case Format::Csv:
      return std::string("series_parallel,witness\n") + (verdict.series_parallel ? "true" : "false") + "," +
             joined(";") + "\n";
    default:
      if (verdict.series_parallel) return "series-parallel\n";
      return std::string("not series-parallel; witness edge") + (witness.size() > 1 ? "s " : " ") + joined(", ") +
             "\n";
  }
}

std::string cmd_immunize(const Globals& g, std::optional<double> p_max) {
  const Network net = need_network(g);
  const auto result = p_max ? immunize(net, ImmunizationMode::Bounded, *p_max) : immunize(net, ImmunizationMode::Exact);
  const auto& game = result.game;
  switch (g.pick(Format::Table)) {
    case Format::Json: {
      json suppressed = json::array();
      for (std::size_t e : result.suppressed) suppressed.push_back(game.edges[e].id);
      return json{{"immunity_guaranteed", result.immunity_guaranteed},
                  {"heuristic", result.heuristic},
                  {"suppressed", suppressed},
                  {"network", network_to_json(game)}}
                 .dump(2) +
             "\n";
    }
    case Format::Csv: {
      std::string s = "edge,from,to,light,family,p,suppressed\n";
      for (std::size_t e = 0; e < game.edges.size(); ++e) {
        const auto& edge = game.edges[e];
        const bool sup = std::binary_search(result.suppressed.begin(), result.suppressed.end(), e);
        s += edge.id + "," + edge.from + "," + edge.to + "," + (edge.has_light ? "true" : "false") + "," +
             std::string(to_string(edge.cost.waiting)) + "," + format_number(edge.cost.p) + "," +
             (sup ? "true" : "false") + "\n";
      }
      return s;
    }
    default: {
      std::ostringstream os;
      os << "suppressed:";
      for (std::size_t e : result.suppressed) os << ' ' << game.edge_label(e);
      os << (result.heuristic ? " (greedy)" : "") << "\n";
      os << "immunity " << (result.immunity_guaranteed ? "guaranteed" : "not guaranteed") << "\n";
      for (const auto& edge : game.edges) {
        if (!edge.has_light) continue;
        os << edge.from << "→" << edge.to << "  " << to_string(edge.cost.waiting) << "  p " << fixed(edge.cost.p)
           << "\n";
      }
      const auto ue = solve_tlue(game, g.solver());
      os << "SC " << fixed(ue.social_cost) << "\n";
      return os.str();
    }
  }
}

std::string cmd_braess(const Globals& g, const std::string& baseline, const std::string& modified) {
  GamePair pair{load_network(baseline), load_network(modified)};
  const auto report = detect_braess(pair, g.solver());
  switch (g.pick(Format::Table)) {
    case Format::Json:
      return braess_report_to_json(report).dump(2) + "\n";
    case Format::Csv:
      return "baseline_social_cost,modified_social_cost,paradox\n" + format_number(report.baseline_cost) + "," +
             format_number(report.modified_cost) + "," + (report.paradox ? "true" : "false") + "\n";
    default:
      return "baseline SC " + fixed(report.baseline_cost) + "\nmodified SC " + fixed(report.modified_cost) +
             "\nparadox " + (report.paradox ? "yes" : "no") + "\n";
  }
}

std::string cmd_sweep(const Globals& g, const std::string& param, double from, double to, std::size_t steps) {
  if (param != "p") throw CLI::ValidationError("--param", "only 'p' can be swept");
  const Network net = need_network(g);
  const auto sweep = sweep_p(net, linspace(from, to, steps), g.solver());
  switch (g.pick(Format::Csv)) {
    case Format::Json: {
      json rows = json::array();
      for (const auto& pt : sweep.points) {
        json row{{"p", num(pt.p)}, {"sc_tlue", num(pt.sc_tlue)}, {"sc_so", num(pt.sc_so)}, {"poa", num(pt.poa)}};
        if (pt.x) row["x"] = num(*pt.x);
        if (pt.y) row["y"] = num(*pt.y);
        if (pt.mid_flow) row["mid_flow"] = num(*pt.mid_flow);
        rows.push_back(row);
      }
      return json{{"points", rows},
                  {"sc_tlue_increasing", sweep.sc_tlue_increasing},
                  {"sc_so_increasing", sweep.sc_so_increasing}}
                 .dump(2) +
             "\n";
    }
    case Format::Table: {
      std::ostringstream os;
      for (const auto& pt : sweep.points) {
        os << "p " << fixed(pt.p) << "  SC_TLUE " << fixed(pt.sc_tlue) << "  SC_SO " << fixed(pt.sc_so) << "  PoA "
           << fixed(pt.poa) << "\n";
      }
      return os.str();
    }
    default:
      return sweep_to_csv(sweep);
  }
}

struct SimOptions {
  bool grid = false;
  double p = 0.5;
  double period = 60.0;
  double arrival_rate = 0.045;
  bool poisson = false;
  double horizon = 20000.0;
};

std::string cmd_sim(const Globals& g, const SimOptions& o) {
  SimConfig cfg;
  cfg.arrival_rate = o.arrival_rate;
  cfg.arrivals = o.poisson ? ArrivalProcess::Poisson : ArrivalProcess::Deterministic;
  cfg.horizon = o.horizon;
  cfg.seed = g.seed;
  if (o.grid) {
    const auto grid = default_grid(cfg);
    const auto corr = correlation_report(grid);
    switch (g.pick(Format::Csv)) {
      case Format::Json: {
        json rows = json::array();
        for (const auto& c : grid) {
          rows.push_back({{"p", num(c.p)},
                          {"T", num(c.period)},
                          {"arrival_rate", num(c.arrival_rate)},
                          {"mean_x", num(c.result.mean_x)},
                          {"mean_wait", num(c.result.mean_wait)},
                          {"mean_journey", num(c.result.mean_journey)},
                          {"seed", c.seed}});
        }
        return json{{"cells", rows},
                    {"rho_p", num(corr.rho_p)},
                    {"rho_T", num(corr.rho_T)},
                    {"rho_p_within_T", num(corr.rho_p_within_T)},
                    {"rho_T_within_p", num(corr.rho_T_within_p)}}
                   .dump(2) +
               "\n";
      }
      case Format::Table:
        return "cells " + std::to_string(corr.cells) + "\nrho(p, wait) " + fixed(corr.rho_p) + "\nrho(T, wait) " +
               fixed(corr.rho_T) + "\nrho(p, wait | T) " + fixed(corr.rho_p_within_T) + "\nrho(T, wait | p) " +
               fixed(corr.rho_T_within_p) + "\n";
      default:
        return grid_to_csv(grid);
    }
  }
  cfg.cycle = LightCycle::from_proportion(o.period, o.p);
  GridCell cell{o.p, o.period, cfg.arrival_rate, cfg.seed, simulate(cfg)};
  switch (g.pick(Format::Table)) {
    case Format::Json:
      return json{{"p", num(o.p)},
                  {"T", num(o.period)},
                  {"arrival_rate", num(cfg.arrival_rate)},
                  {"mean_x", num(cell.result.mean_x)},
                  {"mean_wait", num(cell.result.mean_wait)},
                  {"mean_journey", num(cell.result.mean_journey)},
                  {"vehicles", cell.result.arrivals},
                  {"seed", cfg.seed}}
                 .dump(2) +
             "\n";
    case Format::Csv:
      return grid_to_csv({cell});
    default:
      return "mean wait " + fixed(cell.result.mean_wait) + "\nmean journey " + fixed(cell.result.mean_journey) +
             "\nmean x " + fixed(cell.result.mean_x) + "\nvehicles " + std::to_string(cell.result.arrivals) + "\n";
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Congestion games with traffic lights", "tlcg"};
  app.fallthrough();
  app.require_subcommand(1);

  Globals g;
  const std::map<std::string, Format> formats{{"table", Format::Table}, {"csv", Format::Csv}, {"json", Format::Json}};
  app.add_option("--network", g.network, "network JSON file");
  app.add_option("--out", g.out, "write the report here instead of stdout");
  app.add_option("--format", g.format, "table, csv or json")->transform(CLI::CheckedTransformer(formats));
  app.add_option("--tol", g.tol, "relative gap tolerance")->check(CLI::PositiveNumber);
  app.add_option("--max-iter", g.max_iter, "iteration limit")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "random seed");

  std::string kind = "ue";
  auto* solve = app.add_subcommand("solve", "user equilibrium or social optimum");
  solve->add_option("--kind", kind)->check(CLI::IsMember({"ue", "so"}));

  auto* poa = app.add_subcommand("poa", "price of anarchy");
  auto* sp = app.add_subcommand("sp-check", "series-parallel test");

  std::optional<double> p_max;
  auto* imm = app.add_subcommand("immunize", "suppress the non series-parallel part with lights");
  imm->add_option("--p-max", p_max, "bounded mode with this maximal red proportion")->check(CLI::Range(0.0, 1.0));

  std::string baseline, modified;
  auto* braess = app.add_subcommand("braess-check", "Braess paradox between two games");
  braess->add_option("--baseline", baseline)->required();
  braess->add_option("--modified", modified)->required();

  std::string param = "p";
  double from = 0.0, to = 0.9;
  std::size_t steps = 10;
  auto* sweep = app.add_subcommand("sweep", "sweep the red proportion");
  sweep->add_option("--param", param);
  sweep->add_option("--from", from);
  sweep->add_option("--to", to);
  sweep->add_option("--steps", steps)->check(CLI::PositiveNumber);

  SimOptions sim_opts;
  auto* sim = app.add_subcommand("sim-light", "point-queue signal simulation");
  sim->add_flag("--grid", sim_opts.grid, "run the p x T grid");
  sim->add_option("--p", sim_opts.p)->check(CLI::Range(0.0, 1.0));
  sim->add_option("--period", sim_opts.period)->check(CLI::PositiveNumber);
  sim->add_option("--arrival-rate", sim_opts.arrival_rate)->check(CLI::PositiveNumber);
  sim->add_flag("--poisson", sim_opts.poisson);
  sim->add_option("--horizon", sim_opts.horizon)->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  std::string report;
  try {
    if (*solve) report = cmd_solve(g, kind);
    else if (*poa) report = cmd_poa(g);
    else if (*sp) report = cmd_sp_check(g);
    else if (*imm) report = cmd_immunize(g, p_max);
    else if (*braess) report = cmd_braess(g, baseline, modified);
    else if (*sweep) report = cmd_sweep(g, param, from, to, steps);
    else if (*sim) report = cmd_sim(g, sim_opts);
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  }

  if (g.out.empty()) {
    out << report;
  } else {
    std::ofstream file(g.out, std::ios::binary);
    if (!file) {
      err << "error: cannot write " << g.out << "\n";
      return kExitDomain;
    }
    file << report;
  }
  return kExitOk;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace tlcg::cli
