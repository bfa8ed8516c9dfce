#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tlcg/costs.hpp"
#include "tlcg/error.hpp"

namespace tlcg {

/// How a parameter sweep assigns the red proportion to an edge. Two edges
/// entering the same light see complementary phases.
enum class PhaseRole { Fixed, Primary, Complement };

struct Edge {
  std::string id;
  std::string from;
  std::string to;
  EdgeCost cost;
  bool has_light = false;  // derived, see place_lights
  PhaseRole phase_role = PhaseRole::Fixed;
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Population {
  std::string id;
  std::string origin;
  std::string destination;
  double demand = 0.0;
  friend bool operator==(const Population&, const Population&) = default;
};

struct Network {
  std::vector<std::string> nodes;
  std::vector<Edge> edges;
  std::vector<Population> populations;

  friend bool operator==(const Network&, const Network&) = default;

  std::optional<std::size_t> edge_index(std::string_view id) const;
  std::optional<std::size_t> node_index(std::string_view id) const;
  /// Edge index for the ordered pair, if present.
  std::optional<std::size_t> find_edge(std::string_view from, std::string_view to) const;
  std::size_t in_degree(std::string_view node) const;
  std::size_t out_degree(std::string_view node) const;
  double total_demand() const;
  /// "from→to"
  std::string edge_label(std::size_t e) const;
};

/// Ordered edge indices into Network::edges.
using Path = std::vector<std::size_t>;

/// Lexicographic order on edge-id sequences.
bool path_less(const Network& net, const Path& a, const Path& b);
std::string path_label(const Network& net, const Path& path);  // "OB>BD"

class ValidationError : public DomainError {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Every invariant violation of `raw`, in a stable order. Empty when valid.
/// Light flags are judged as place_lights would set them.
std::vector<std::string> network_violations(const Network& raw);

/// Returns `raw` with lights placed, or throws ValidationError listing every
/// violation.
Network validate_network(Network raw);

/// A node carries a light iff at least two edges enter it and at least one
/// leaves it (a sink is a destination, not a junction). Edges into a light node
/// get has_light = true. Idempotent.
Network place_lights(Network net);

class PathLimitExceeded : public DomainError {
 public:
  using DomainError::DomainError;
};

/// All simple directed OD paths of population `pop`, sorted by path_less.
/// Throws PathLimitExceeded when more than `cap` exist.
std::vector<Path> enumerate_paths(const Network& net, std::size_t pop, std::size_t cap = 64);

/// Edges lying on some directed origin->destination walk, restricted to the
/// `included` mask when given.
std::vector<bool> usable_edges(const Network& net, std::string_view origin, std::string_view destination,
                               const std::vector<bool>& included = {});

struct ReductionStep {
  enum class Kind { Parallel, Series } kind;
  std::string detail;
};

struct SpVerdict {
  bool series_parallel = false;
  std::vector<ReductionStep> trace;
  /// Edges left once no reduction applies (1 when series-parallel).
  std::size_t residual_edges = 0;
};

/// The origin/destination shared by all populations; throws if they differ.
std::pair<std::string, std::string> terminal_pair(const Network& net);

/// Series-parallel test on the OD-usable edges of `included`, by repeated
/// parallel merging and series contraction. With a seed, each step picks a
/// random applicable reduction instead of the first one.
SpVerdict series_parallel_check(const Network& net, std::string_view origin, std::string_view destination,
                                const std::vector<bool>& included = {},
                                std::optional<std::uint64_t> shuffle_seed = std::nullopt);

/// Two-terminal series-parallel test. Throws DomainError if not two-terminal.
SpVerdict is_series_parallel(const Network& net);

struct SpSubgraph {
  std::vector<std::size_t> removed;  // Ê, closed edges sorted by id
  bool heuristic = false;
};

inline constexpr std::size_t kExactSpSearchLimit = 16;

/// Smallest set of edges ending at a light (in-degree rule) whose closure
/// leaves a series-parallel subnetwork with an OD path. Edges that lose every
/// OD path drop out without being listed. Ties: most surviving edges, then
/// fewest OD hops, then smallest sorted ids. Exhaustive up to
/// kExactSpSearchLimit candidate edges, greedy beyond.
SpSubgraph max_sp_subgraph(const Network& net);

}  // namespace tlcg
