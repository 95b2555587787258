#pragma once

// Seeded random instances. Randomness lives only here; every algorithm in
// the library is deterministic.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "graph.hpp"

namespace cliqueflow::gen {

using Rng = std::mt19937_64;

inline std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

// Random spanning tree plus `extra` random edges, integer weights in [1, max_w].
inline WeightedGraph connected_graph(std::size_t n, std::size_t extra, std::int64_t max_w, Rng& rng) {
  WeightedGraph g(n);
  for (NodeId v = 1; v < n; ++v) {
    const auto u = static_cast<NodeId>(uniform_int(rng, 0, v - 1));
    g.add_edge(u, v, static_cast<double>(uniform_int(rng, 1, max_w)));
  }
  if (n < 2) return g;
  for (std::size_t i = 0; i < extra; ++i) {
    auto u = static_cast<NodeId>(uniform_int(rng, 0, static_cast<std::int64_t>(n) - 1));
    auto v = static_cast<NodeId>(uniform_int(rng, 0, static_cast<std::int64_t>(n) - 2));
    if (v >= u) ++v;
    g.add_edge(u, v, static_cast<double>(uniform_int(rng, 1, max_w)));
  }
  return g;
}

// Union of random closed walks: every vertex has even degree.
inline WeightedGraph eulerian_multigraph(std::size_t n, std::size_t target_edges, Rng& rng) {
  WeightedGraph g(n);
  if (n < 2) return g;
  while (g.num_edges() < target_edges) {
    const auto len = static_cast<std::size_t>(uniform_int(rng, 2, std::max<std::int64_t>(2, static_cast<std::int64_t>(n))));
    std::vector<NodeId> walk;
    walk.push_back(static_cast<NodeId>(uniform_int(rng, 0, static_cast<std::int64_t>(n) - 1)));
    for (std::size_t i = 1; i < len; ++i) {
      NodeId next;
      do {
        next = static_cast<NodeId>(uniform_int(rng, 0, static_cast<std::int64_t>(n) - 1));
      } while (next == walk.back());
      walk.push_back(next);
    }
    if (walk.back() == walk.front()) walk.pop_back();
    if (walk.size() < 2) continue;
    for (std::size_t i = 0; i < walk.size(); ++i) g.add_edge(walk[i], walk[(i + 1) % walk.size()], 1.0);
  }
  return g;
}

struct StInstance {
  FlowNetwork net;
  NodeId s = 0;
  NodeId t = 0;
};

// Random DAG on vertices ordered by index, s = 0, t = n-1, capacities in [1, max_u].
inline StInstance random_dag(std::size_t n, std::size_t m, std::int64_t max_u, Rng& rng) {
  StInstance inst{FlowNetwork(n), 0, static_cast<NodeId>(n - 1)};
  for (std::size_t i = 0; i < m; ++i) {
    auto a = static_cast<NodeId>(uniform_int(rng, 0, static_cast<std::int64_t>(n) - 2));
    auto b = static_cast<NodeId>(uniform_int(rng, a + 1, static_cast<std::int64_t>(n) - 1));
    inst.net.add_arc(a, b, uniform_int(rng, 1, max_u), uniform_int(rng, 1, 8));
  }
  return inst;
}

struct DemandInstance {
  FlowNetwork net;
  std::vector<std::int64_t> sigma;  // inflow minus outflow required at each vertex
};

// Unit capacities, costs in [1, max_c]; sigma is the residue of a random 0/1 flow.
inline DemandInstance random_unit_mcf(std::size_t n, std::size_t m, std::int64_t max_c, double density, Rng& rng) {
  DemandInstance inst{FlowNetwork(n), std::vector<std::int64_t>(n, 0)};
  std::bernoulli_distribution used(density);
  for (std::size_t i = 0; i < m; ++i) {
    auto a = static_cast<NodeId>(uniform_int(rng, 0, static_cast<std::int64_t>(n) - 1));
    auto b = static_cast<NodeId>(uniform_int(rng, 0, static_cast<std::int64_t>(n) - 2));
    if (b >= a) ++b;
    inst.net.add_arc(a, b, 1, uniform_int(rng, 1, max_c));
    if (used(rng)) {
      inst.sigma[b] += 1;
      inst.sigma[a] -= 1;
    }
  }
  return inst;
}

// Integral flow made of up to `units` random unit s-t paths in a DAG.
inline std::vector<std::int64_t> random_path_flow(const StInstance& inst, std::size_t units, Rng& rng) {
  const auto& g = inst.net;
  std::vector<std::int64_t> f(g.num_arcs(), 0);
  std::vector<std::vector<EdgeId>> out(g.num_vertices());
  for (EdgeId e = 0; e < g.num_arcs(); ++e) out[g.arc(e).from].push_back(e);
  for (std::size_t k = 0; k < units; ++k) {
    // random depth-first search for a path with spare capacity
    std::vector<EdgeId> path;
    std::vector<char> dead(g.num_vertices(), 0);
    NodeId at = inst.s;
    while (at != inst.t) {
      std::vector<EdgeId> options;
      for (auto e : out[at])
        if (f[e] < g.arc(e).capacity && !dead[g.arc(e).to]) options.push_back(e);
      if (options.empty()) {
        dead[at] = 1;
        if (path.empty()) break;
        at = g.arc(path.back()).from;
        path.pop_back();
        continue;
      }
      auto e = options[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(options.size()) - 1))];
      path.push_back(e);
      at = g.arc(e).to;
    }
    if (at != inst.t) break;
    for (auto e : path) ++f[e];
  }
  return f;
}

}  // namespace cliqueflow::gen
