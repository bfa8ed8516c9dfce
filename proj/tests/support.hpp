#pragma once

// Shared fixtures and independent oracles for the test binaries. Nothing in
// here calls the solver; oracles work from the raw formulas.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "tlcg/network.hpp"
#include "tlcg/network_io.hpp"

namespace testing {

inline tlcg::Network bundled(const std::string& name) {
  return tlcg::load_network(std::string(TLCG_NETWORK_DIR) + "/" + name + ".json");
}

inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 2000) {
  if (n % 2) ++n;
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

inline tlcg::Edge edge(std::string id, std::string from, std::string to, tlcg::EdgeCost cost = {}) {
  tlcg::Edge e;
  e.id = std::move(id);
  e.from = std::move(from);
  e.to = std::move(to);
  e.cost = std::move(cost);
  return e;
}

inline tlcg::EdgeCost affine(double a, double b) { return tlcg::EdgeCost{tlcg::Affine{a, b}}; }

inline tlcg::Network single_od(std::vector<std::string> nodes, std::vector<tlcg::Edge> edges, double demand = 1.0,
                               std::string o = "O", std::string d = "D") {
  tlcg::Network net;
  net.nodes = std::move(nodes);
  net.edges = std::move(edges);
  net.populations.push_back({"commuters", std::move(o), std::move(d), demand});
  return net;
}

inline tlcg::Network pigou(double constant = 1.0) {
  return tlcg::validate_network(single_od({"O", "M", "D"}, {edge("OD", "O", "D", affine(1, 0)),
                                                            edge("OM", "O", "M", affine(0, constant)),
                                                            edge("MD", "M", "D", affine(0, 0))}));
}

// A small network with hand-listed paths (edge indices), so the grid oracle
// never touches enumerate_paths.
struct Listed {
  tlcg::Network net;
  std::vector<std::vector<std::size_t>> paths;
};

// 2 or 3 OD routes with random affine costs: parallel routes or the
// Wheatstone bridge.
inline Listed random_small_game(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coef(0.0, 3.0);
  std::uniform_int_distribution<int> shape(0, 2);
  auto c = [&] { return affine(coef(rng), coef(rng)); };
  Listed g;
  switch (shape(rng)) {
    case 0:  // two routes
      g.net = single_od({"O", "A", "D"}, {edge("OA", "O", "A", c()), edge("AD", "A", "D", c()),
                                          edge("OD", "O", "D", c())});
      g.paths = {{0, 1}, {2}};
      break;
    case 1:  // three parallel routes
      g.net = single_od({"O", "A", "B", "D"}, {edge("OA", "O", "A", c()), edge("AD", "A", "D", c()),
                                               edge("OB", "O", "B", c()), edge("BD", "B", "D", c()),
                                               edge("OD", "O", "D", c())});
      g.paths = {{0, 1}, {2, 3}, {4}};
      break;
    default:  // bridge
      g.net = single_od({"O", "B", "C", "D"}, {edge("OB", "O", "B", c()), edge("OC", "O", "C", c()),
                                               edge("BC", "B", "C", c()), edge("BD", "B", "D", c()),
                                               edge("CD", "C", "D", c())});
      g.paths = {{0, 3}, {1, 4}, {0, 2, 4}};
      break;
  }
  g.net.populations[0].demand = std::uniform_real_distribution<double>(0.5, 2.0)(rng);
  g.net = tlcg::validate_network(g.net);
  return g;
}

// Exhaustive search over path splits (step h of the demand) for the minimum
// of the Beckmann potential; returns the social cost there. Affine costs only.
inline double grid_search_ue_cost(const Listed& g, double h = 1e-3) {
  const auto& net = g.net;
  const double d = net.populations[0].demand;
  const int steps = static_cast<int>(std::lround(1.0 / h));
  std::vector<double> a(net.edges.size()), b(net.edges.size());
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    const auto& line = std::get<tlcg::Affine>(net.edges[e].cost.base);
    a[e] = line.slope;
    b[e] = line.intercept;
  }
  std::vector<double> load(net.edges.size());
  auto evaluate = [&](const std::vector<double>& x, double& phi, double& sc) {
    std::fill(load.begin(), load.end(), 0.0);
    for (std::size_t s = 0; s < g.paths.size(); ++s) {
      for (std::size_t e : g.paths[s]) load[e] += x[s];
    }
    phi = sc = 0.0;
    for (std::size_t e = 0; e < load.size(); ++e) {
      phi += 0.5 * a[e] * load[e] * load[e] + b[e] * load[e];
      sc += load[e] * (a[e] * load[e] + b[e]);
    }
  };
  double best_phi = std::numeric_limits<double>::infinity(), best_sc = 0.0;
  std::vector<double> x(g.paths.size());
  for (int i = 0; i <= steps; ++i) {
    const int rest_max = g.paths.size() == 3 ? steps - i : 0;
    for (int j = 0; j <= rest_max; ++j) {
      if (g.paths.size() == 2) {
        x = {d * i / steps, d * (steps - i) / steps};
      } else {
        x = {d * i / steps, d * j / steps, d * (steps - i - j) / steps};
      }
      double phi, sc;
      evaluate(x, phi, sc);
      if (phi < best_phi) {
        best_phi = phi;
        best_sc = sc;
      }
    }
  }
  return best_sc;
}

// Random two-terminal DAG over nodes O, N1..Nk, D: a spine O→N1→…→D plus random
// forward chords. Every edge lies on some OD path.
inline tlcg::Network random_two_terminal(std::mt19937_64& rng, int inner, int chords) {
  std::vector<std::string> nodes{"O"};
  for (int i = 1; i <= inner; ++i) nodes.push_back("N" + std::to_string(i));
  nodes.push_back("D");
  std::uniform_real_distribution<double> coef(0.0, 2.0);
  std::vector<tlcg::Edge> edges;
  auto has = [&](std::size_t u, std::size_t v) {
    for (const auto& e : edges) {
      if (e.from == nodes[u] && e.to == nodes[v]) return true;
    }
    return false;
  };
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    edges.push_back(edge("e" + std::to_string(edges.size()), nodes[i], nodes[i + 1], affine(coef(rng), coef(rng))));
  }
  std::uniform_int_distribution<std::size_t> pick(0, nodes.size() - 1);
  for (int tries = 0, added = 0; added < chords && tries < 200; ++tries) {
    std::size_t u = pick(rng), v = pick(rng);
    if (u > v) std::swap(u, v);
    if (v <= u + 1 || has(u, v)) continue;
    edges.push_back(edge("e" + std::to_string(edges.size()), nodes[u], nodes[v], affine(coef(rng), coef(rng))));
    ++added;
  }
  return tlcg::validate_network(single_od(nodes, edges));
}


// Independent series-parallel oracle: prune edges off every O→D walk, then
// merge parallel pairs and contract 1-in/1-out inner nodes until stuck.
inline bool oracle_series_parallel(const tlcg::Network& net, const std::vector<bool>& keep) {
  const auto& o = net.populations[0].origin;
  const auto& d = net.populations[0].destination;
  std::vector<std::pair<std::string, std::string>> es;
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    if (keep.empty() || keep[e]) es.emplace_back(net.edges[e].from, net.edges[e].to);
  }
  auto reach = [&](const std::string& start, bool forward) {
    std::vector<std::string> seen{start};
    for (bool grew = true; grew;) {
      grew = false;
      for (const auto& [u, v] : es) {
        const auto& a = forward ? u : v;
        const auto& b = forward ? v : u;
        if (std::find(seen.begin(), seen.end(), a) != seen.end() &&
            std::find(seen.begin(), seen.end(), b) == seen.end()) {
          seen.push_back(b);
          grew = true;
        }
      }
    }
    return seen;
  };
  const auto from_o = reach(o, true), to_d = reach(d, false);
  std::vector<std::pair<std::string, std::string>> live;
  for (const auto& [u, v] : es) {
    if (std::find(from_o.begin(), from_o.end(), u) != from_o.end() &&
        std::find(to_d.begin(), to_d.end(), v) != to_d.end()) {
      live.emplace_back(u, v);
    }
  }
  if (live.empty()) return false;
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < live.size() && !changed; ++i) {
      for (std::size_t j = i + 1; j < live.size(); ++j) {
        if (live[i] == live[j]) {
          live.erase(live.begin() + static_cast<std::ptrdiff_t>(j));
          changed = true;
          break;
        }
      }
    }
    if (changed) continue;
    for (const auto& [u, v] : live) {
      const std::string& mid = v;
      if (mid == o || mid == d) continue;
      std::size_t in = 0, out = 0, in_i = 0, out_i = 0;
      for (std::size_t k = 0; k < live.size(); ++k) {
        if (live[k].second == mid) { ++in; in_i = k; }
        if (live[k].first == mid) { ++out; out_i = k; }
      }
      if (in == 1 && out == 1) {
        live[in_i].second = live[out_i].second;
        live.erase(live.begin() + static_cast<std::ptrdiff_t>(out_i));
        changed = true;
        break;
      }
    }
  }
  return live.size() == 1 && live[0].first == o && live[0].second == d;
}

}  // namespace testing
