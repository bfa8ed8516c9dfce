#include "tlcg/network.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <tuple>

namespace tlcg {

std::optional<std::size_t> Network::edge_index(std::string_view id) const {
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (edges[e].id == id) return e;
  }
  return std::nullopt;
}

std::optional<std::size_t> Network::node_index(std::string_view id) const {
  for (std::size_t v = 0; v < nodes.size(); ++v) {
    if (nodes[v] == id) return v;
  }
  return std::nullopt;
}

std::optional<std::size_t> Network::find_edge(std::string_view from, std::string_view to) const {
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (edges[e].from == from && edges[e].to == to) return e;
  }
  return std::nullopt;
}

std::size_t Network::in_degree(std::string_view node) const {
  return static_cast<std::size_t>(
      std::count_if(edges.begin(), edges.end(), [&](const Edge& e) { return e.to == node; }));
}

std::size_t Network::out_degree(std::string_view node) const {
  return static_cast<std::size_t>(
      std::count_if(edges.begin(), edges.end(), [&](const Edge& e) { return e.from == node; }));
}

double Network::total_demand() const {
  double total = 0.0;
  for (const auto& pop : populations) total += pop.demand;
  return total;
}

std::string Network::edge_label(std::size_t e) const {
  return edges[e].from + "→" + edges[e].to;
}

bool path_less(const Network& net, const Path& a, const Path& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), [&](std::size_t x, std::size_t y) {
    return net.edges[x].id < net.edges[y].id;
  });
}

std::string path_label(const Network& net, const Path& path) {
  std::string label;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i > 0) label += '>';
    label += net.edges[path[i]].id;
  }
  return label;
}

ValidationError::ValidationError(std::vector<std::string> violations)
    : DomainError([&] {
        std::string msg = "invalid network:";
        for (const auto& v : violations) msg += "\n  - " + v;
        return msg;
      }()),
      violations_(std::move(violations)) {}

namespace {

std::vector<bool> reachable(const Network& net, std::string_view start, bool forward,
                            const std::vector<bool>& included) {
  std::vector<bool> seen(net.nodes.size(), false);
  const auto s = net.node_index(start);
  if (!s) return seen;
  std::vector<std::size_t> stack{*s};
  seen[*s] = true;
  while (!stack.empty()) {
    const std::size_t v = stack.back();
    stack.pop_back();
    for (std::size_t e = 0; e < net.edges.size(); ++e) {
      if (!included.empty() && !included[e]) continue;
      const auto& edge = net.edges[e];
      const std::string& tail = forward ? edge.from : edge.to;
      const std::string& head = forward ? edge.to : edge.from;
      if (tail != net.nodes[v]) continue;
      const auto h = net.node_index(head);
      if (h && !seen[*h]) {
        seen[*h] = true;
        stack.push_back(*h);
      }
    }
  }
  return seen;
}

bool light_node(const Network& net, std::string_view node) {
  return net.in_degree(node) >= 2 && net.out_degree(node) >= 1;
}

}  // namespace

std::vector<std::string> network_violations(const Network& raw) {
  std::vector<std::string> out;
  std::set<std::string> node_ids;
  for (const auto& n : raw.nodes) {
    if (!node_ids.insert(n).second) out.push_back("duplicate node '" + n + "'");
  }

  std::set<std::string> edge_ids;
  std::set<std::pair<std::string, std::string>> pairs;
  for (const auto& e : raw.edges) {
    if (!edge_ids.insert(e.id).second) out.push_back("duplicate edge id '" + e.id + "'");
    if (!node_ids.count(e.from)) out.push_back("edge '" + e.id + "' starts at unknown node '" + e.from + "'");
    if (!node_ids.count(e.to)) out.push_back("edge '" + e.id + "' ends at unknown node '" + e.to + "'");
    if (e.from == e.to) out.push_back("self-loop: edge '" + e.id + "' at node '" + e.from + "'");
    if (!pairs.insert({e.from, e.to}).second) {
      out.push_back("duplicate edge for ordered pair " + e.from + "→" + e.to + " ('" + e.id + "')");
    }
    try {
      validate_cost(e.cost);
    } catch (const DomainError& err) {
      out.push_back("edge '" + e.id + "': " + err.what());
    }
    if (e.cost.waiting != WaitingFamily::Zero && node_ids.count(e.to) && !light_node(raw, e.to)) {
      out.push_back("edge '" + e.id + "' has a waiting family but no light at '" + e.to + "'");
    }
  }

  if (raw.populations.empty()) out.push_back("network has no populations");
  std::set<std::string> pop_ids;
  for (const auto& pop : raw.populations) {
    if (!pop_ids.insert(pop.id).second) out.push_back("duplicate population id '" + pop.id + "'");
    if (!(pop.demand >= 0.0)) out.push_back("negative demand for population '" + pop.id + "'");
    const bool known_o = node_ids.count(pop.origin) > 0;
    const bool known_d = node_ids.count(pop.destination) > 0;
    if (!known_o) out.push_back("population '" + pop.id + "' has unknown origin '" + pop.origin + "'");
    if (!known_d) out.push_back("population '" + pop.id + "' has unknown destination '" + pop.destination + "'");
    if (pop.origin == pop.destination) out.push_back("population '" + pop.id + "' has origin equal to destination");
    if (known_o && known_d && pop.origin != pop.destination) {
      const auto seen = reachable(raw, pop.origin, true, {});
      if (!seen[*raw.node_index(pop.destination)]) {
        out.push_back("unreachable destination '" + pop.destination + "' for population '" + pop.id + "'");
      }
    }
  }
  return out;
}

Network validate_network(Network raw) {
  auto violations = network_violations(raw);
  if (!violations.empty()) throw ValidationError(std::move(violations));
  return place_lights(std::move(raw));
}

Network place_lights(Network net) {
  for (auto& e : net.edges) e.has_light = light_node(net, e.to);
  return net;
}

std::vector<Path> enumerate_paths(const Network& net, std::size_t pop, std::size_t cap) {
  const auto& population = net.populations.at(pop);
  std::vector<std::size_t> order(net.edges.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return net.edges[a].id < net.edges[b].id; });

  std::vector<Path> paths;
  Path current;
  std::set<std::string> visited{population.origin};
  // Recursive DFS over out-edges in id order.
  auto dfs = [&](auto&& self, const std::string& node) -> void {
    if (node == population.destination) {
      paths.push_back(current);
      if (paths.size() > cap) {
        throw PathLimitExceeded("more than " + std::to_string(cap) + " paths for population '" +
                                population.id + "'; use the iterative solver without enumeration");
      }
      return;
    }
    for (std::size_t e : order) {
      const auto& edge = net.edges[e];
      if (edge.from != node || visited.count(edge.to)) continue;
      visited.insert(edge.to);
      current.push_back(e);
      self(self, edge.to);
      current.pop_back();
      visited.erase(edge.to);
    }
  };
  dfs(dfs, population.origin);
  std::sort(paths.begin(), paths.end(), [&](const Path& a, const Path& b) { return path_less(net, a, b); });
  return paths;
}

std::vector<bool> usable_edges(const Network& net, std::string_view origin, std::string_view destination,
                               const std::vector<bool>& included) {
  const auto fwd = reachable(net, origin, true, included);
  const auto bwd = reachable(net, destination, false, included);
  std::vector<bool> usable(net.edges.size(), false);
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    if (!included.empty() && !included[e]) continue;
    const auto u = net.node_index(net.edges[e].from);
    const auto v = net.node_index(net.edges[e].to);
    usable[e] = u && v && fwd[*u] && bwd[*v];
  }
  return usable;
}

std::pair<std::string, std::string> terminal_pair(const Network& net) {
  if (net.populations.empty()) throw DomainError("network has no populations");
  const auto& first = net.populations.front();
  for (const auto& pop : net.populations) {
    if (pop.origin != first.origin || pop.destination != first.destination) {
      throw DomainError("network is not two-terminal: populations have different OD pairs");
    }
  }
  return {first.origin, first.destination};
}

namespace {

struct ReducedEdge {
  std::size_t from;
  std::size_t to;
  std::string label;
};

struct Reduction {
  ReductionStep::Kind kind;
  std::size_t a;  // parallel: edge pair (a, b); series: node a
  std::size_t b;
};

std::vector<Reduction> applicable(const std::vector<ReducedEdge>& edges, std::size_t node_count, std::size_t o,
                                  std::size_t d, bool first_only) {
  std::vector<Reduction> out;
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> seen;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    auto [it, fresh] = seen.emplace(std::pair{edges[i].from, edges[i].to}, i);
    if (!fresh) {
      out.push_back({ReductionStep::Kind::Parallel, it->second, i});
      if (first_only) return out;
    }
  }
  std::vector<std::size_t> in(node_count, 0), outd(node_count, 0);
  for (const auto& e : edges) {
    ++outd[e.from];
    ++in[e.to];
  }
  for (std::size_t v = 0; v < node_count; ++v) {
    if (v == o || v == d || in[v] != 1 || outd[v] != 1) continue;
    out.push_back({ReductionStep::Kind::Series, v, 0});
    if (first_only) return out;
  }
  return out;
}

}  // namespace

SpVerdict series_parallel_check(const Network& net, std::string_view origin, std::string_view destination,
                                const std::vector<bool>& included, std::optional<std::uint64_t> shuffle_seed) {
  const auto o = net.node_index(origin);
  const auto d = net.node_index(destination);
  if (!o || !d || *o == *d) throw DomainError("series-parallel check needs two distinct terminals");

  const auto usable = usable_edges(net, origin, destination, included);
  std::vector<ReducedEdge> edges;
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    if (usable[e]) edges.push_back({*net.node_index(net.edges[e].from), *net.node_index(net.edges[e].to), net.edge_label(e)});
  }
  if (edges.empty()) throw DomainError("no path from '" + std::string(origin) + "' to '" + std::string(destination) + "'");

  std::mt19937_64 rng(shuffle_seed.value_or(0));
  SpVerdict verdict;
  while (true) {
    const auto options = applicable(edges, net.nodes.size(), *o, *d, !shuffle_seed.has_value());
    if (options.empty()) break;
    Reduction r = options.front();
    if (shuffle_seed) r = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];

    if (r.kind == ReductionStep::Kind::Parallel) {
      const std::string label = "(" + edges[r.a].label + " ∥ " + edges[r.b].label + ")";
      verdict.trace.push_back({r.kind, "parallel " + label});
      edges[r.a].label = label;
      edges.erase(edges.begin() + static_cast<std::ptrdiff_t>(r.b));
    } else {
      std::size_t in_e = 0, out_e = 0;
      for (std::size_t i = 0; i < edges.size(); ++i) {
        if (edges[i].to == r.a) in_e = i;
        if (edges[i].from == r.a) out_e = i;
      }
      const std::string label = edges[in_e].label + " · " + edges[out_e].label;
      verdict.trace.push_back({r.kind, "series at " + net.nodes[r.a] + ": " + label});
      edges[in_e] = ReducedEdge{edges[in_e].from, edges[out_e].to, "(" + label + ")"};
      edges.erase(edges.begin() + static_cast<std::ptrdiff_t>(out_e));
    }
  }
  verdict.residual_edges = edges.size();
  verdict.series_parallel = edges.size() == 1 && edges[0].from == *o && edges[0].to == *d;
  return verdict;
}

SpVerdict is_series_parallel(const Network& net) {
  const auto [o, d] = terminal_pair(net);
  return series_parallel_check(net, o, d);
}

namespace {

// Hop count of the shortest O->D path over `mask`, or SIZE_MAX.
std::size_t hop_distance(const Network& net, std::size_t o, std::size_t d, const std::vector<bool>& mask) {
  std::vector<std::size_t> dist(net.nodes.size(), SIZE_MAX);
  std::queue<std::size_t> queue;
  dist[o] = 0;
  queue.push(o);
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop();
    for (std::size_t e = 0; e < net.edges.size(); ++e) {
      if (!mask[e] || net.edges[e].from != net.nodes[v]) continue;
      const std::size_t w = *net.node_index(net.edges[e].to);
      if (dist[w] == SIZE_MAX) {
        dist[w] = dist[v] + 1;
        queue.push(w);
      }
    }
  }
  return dist[d];
}

std::vector<std::string> sorted_ids(const Network& net, const std::vector<std::size_t>& edges) {
  std::vector<std::string> ids;
  for (auto e : edges) ids.push_back(net.edges[e].id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::size_t count(const std::vector<bool>& mask) {
  return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
}

}  // namespace

SpSubgraph max_sp_subgraph(const Network& net) {
  const auto [origin, destination] = terminal_pair(net);
  const std::size_t o = *net.node_index(origin);
  const std::size_t d = *net.node_index(destination);
  const auto usable = usable_edges(net, origin, destination);
  if (count(usable) == 0) throw DomainError("no OD path: no series-parallel subgraph exists");

  // Only an edge ending at a light can be closed. Edges that lose every OD
  // path once those are closed drop out on their own.
  const Network lit = place_lights(net);
  std::vector<std::size_t> candidates;
  for (std::size_t e = 0; e < net.edges.size(); ++e) {
    if (usable[e] && lit.edges[e].has_light) candidates.push_back(e);
  }
  std::sort(candidates.begin(), candidates.end(), [&](auto a, auto b) { return net.edges[a].id < net.edges[b].id; });

  auto surviving = [&](const std::vector<std::size_t>& closed) {
    auto mask = usable;
    for (std::size_t e : closed) mask[e] = false;
    return usable_edges(net, origin, destination, mask);
  };
  auto is_sp = [&](const std::vector<bool>& kept) {
    return count(kept) > 0 && series_parallel_check(net, origin, destination, kept).series_parallel;
  };

  if (is_sp(usable)) return SpSubgraph{{}, false};

  const std::size_t n = candidates.size();
  if (n <= kExactSpSearchLimit) {
    std::vector<std::vector<std::uint32_t>> by_size(n + 1);
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) by_size[std::popcount(mask)].push_back(mask);

    for (std::size_t k = 1; k <= n; ++k) {
      // most surviving edges, then shortest OD hop count, then smallest ids
      std::optional<std::tuple<std::ptrdiff_t, std::size_t, std::vector<std::string>, std::vector<std::size_t>>> best;
      for (std::uint32_t mask : by_size[k]) {
        std::vector<std::size_t> closed;
        for (std::size_t i = 0; i < n; ++i) {
          if (mask & (1u << i)) closed.push_back(candidates[i]);
        }
        const auto kept = surviving(closed);
        // closing an edge that had already dropped out is not minimal
        bool redundant = false;
        for (std::size_t e : closed) {
          auto fewer = closed;
          fewer.erase(std::find(fewer.begin(), fewer.end(), e));
          if (surviving(fewer) == kept) redundant = true;
        }
        if (redundant || !is_sp(kept)) continue;
        auto key = std::tuple{-static_cast<std::ptrdiff_t>(count(kept)), hop_distance(net, o, d, kept),
                              sorted_ids(net, closed), closed};
        if (!best || std::tie(std::get<0>(key), std::get<1>(key), std::get<2>(key)) <
                         std::tie(std::get<0>(*best), std::get<1>(*best), std::get<2>(*best))) {
          best = std::move(key);
        }
      }
      if (best) return SpSubgraph{std::get<3>(*best), false};
    }
    throw DomainError("closing edges at traffic lights cannot make the network series-parallel");
  }

  // Greedy: close the lit edge that leaves the smallest irreducible residual.
  std::vector<std::size_t> closed;
  auto residual = [&](const std::vector<bool>& mask) {
    return series_parallel_check(net, origin, destination, mask).residual_edges;
  };
  auto kept = usable;
  while (!is_sp(kept)) {
    std::optional<std::pair<std::size_t, std::size_t>> best;
    for (std::size_t e : candidates) {
      if (!kept[e]) continue;
      auto trial = closed;
      trial.push_back(e);
      const auto mask = surviving(trial);
      if (count(mask) == 0) continue;
      const std::size_t score = residual(mask);
      if (!best || score < best->first) best = std::pair{score, e};
    }
    if (!best) throw DomainError("closing edges at traffic lights cannot make the network series-parallel");
    closed.push_back(best->second);
    kept = surviving(closed);
  }
  // Reopen closed edges that keep the subgraph series-parallel.
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < closed.size(); ++i) {
      auto trial = closed;
      trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(i));
      if (is_sp(surviving(trial))) {
        closed = std::move(trial);
        changed = true;
        break;
      }
    }
  }
  std::sort(closed.begin(), closed.end(), [&](auto a, auto b) { return net.edges[a].id < net.edges[b].id; });
  return SpSubgraph{closed, true};
}

}  // namespace tlcg
