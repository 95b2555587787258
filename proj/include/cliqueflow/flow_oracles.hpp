#pragma once

// Small, exact, centralized reference algorithms used to check the
// distributed ones.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "graph.hpp"

namespace cliqueflow::oracle {

struct IntFlow {
  std::int64_t value = 0;
  std::int64_t cost = 0;
  std::vector<std::int64_t> flow;
};

namespace detail {

// residual graph with paired forward/backward entries
struct Residual {
  struct Entry {
    NodeId to;
    std::int64_t cap;
    std::int64_t cost;
    std::size_t rev;
    std::int64_t arc;  // original arc index for forward entries, -1 otherwise
  };
  std::vector<std::vector<Entry>> adj;

  explicit Residual(std::size_t n) : adj(n) {}

  void add(NodeId u, NodeId v, std::int64_t cap, std::int64_t cost, std::int64_t arc) {
    adj[u].push_back({v, cap, cost, adj[v].size(), arc});
    adj[v].push_back({u, 0, -cost, adj[u].size() - 1, -1});
  }

  std::vector<std::int64_t> arc_flows(const FlowNetwork& g) const {
    std::vector<std::int64_t> f(g.num_arcs(), 0);
    for (const auto& list : adj)
      for (const auto& e : list)
        if (e.arc >= 0) f[static_cast<std::size_t>(e.arc)] = g.arc(static_cast<EdgeId>(e.arc)).capacity - e.cap;
    return f;
  }
};

// successive shortest paths with Bellman-Ford; returns (flow, cost)
inline std::pair<std::int64_t, std::int64_t> ssp(Residual& r, NodeId s, NodeId t, std::int64_t limit) {
  const std::size_t n = r.adj.size();
  constexpr auto inf = std::numeric_limits<std::int64_t>::max() / 4;
  std::int64_t flow = 0, cost = 0;
  while (flow < limit) {
    std::vector<std::int64_t> dist(n, inf);
    std::vector<std::pair<NodeId, std::size_t>> prev(n, {0, SIZE_MAX});
    dist[s] = 0;
    for (std::size_t round = 0; round < n; ++round) {
      bool changed = false;
      for (NodeId u = 0; u < n; ++u) {
        if (dist[u] == inf) continue;
        for (std::size_t i = 0; i < r.adj[u].size(); ++i) {
          const auto& e = r.adj[u][i];
          if (e.cap > 0 && dist[u] + e.cost < dist[e.to]) {
            dist[e.to] = dist[u] + e.cost;
            prev[e.to] = {u, i};
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    if (dist[t] == inf) break;
    std::int64_t push = limit - flow;
    for (NodeId v = t; v != s; v = prev[v].first) push = std::min(push, r.adj[prev[v].first][prev[v].second].cap);
    for (NodeId v = t; v != s; v = prev[v].first) {
      auto& e = r.adj[prev[v].first][prev[v].second];
      e.cap -= push;
      r.adj[e.to][e.rev].cap += push;
    }
    flow += push;
    cost += push * dist[t];
  }
  return {flow, cost};
}

}  // namespace detail

// Edmonds-Karp (BFS augmenting paths).
inline IntFlow max_flow(const FlowNetwork& g, NodeId s, NodeId t) {
  detail::Residual r(g.num_vertices());
  for (EdgeId e = 0; e < g.num_arcs(); ++e) r.add(g.arc(e).from, g.arc(e).to, g.arc(e).capacity, 0, e);
  IntFlow out;
  if (s == t) throw std::invalid_argument("source equals sink");
  while (true) {
    std::vector<std::pair<NodeId, std::size_t>> prev(g.num_vertices(), {0, SIZE_MAX});
    std::vector<char> seen(g.num_vertices(), 0);
    std::deque<NodeId> q{s};
    seen[s] = 1;
    while (!q.empty() && !seen[t]) {
      const NodeId u = q.front();
      q.pop_front();
      for (std::size_t i = 0; i < r.adj[u].size(); ++i) {
        const auto& e = r.adj[u][i];
        if (e.cap > 0 && !seen[e.to]) {
          seen[e.to] = 1;
          prev[e.to] = {u, i};
          q.push_back(e.to);
        }
      }
    }
    if (!seen[t]) break;
    std::int64_t push = std::numeric_limits<std::int64_t>::max();
    for (NodeId v = t; v != s; v = prev[v].first) push = std::min(push, r.adj[prev[v].first][prev[v].second].cap);
    for (NodeId v = t; v != s; v = prev[v].first) {
      auto& e = r.adj[prev[v].first][prev[v].second];
      e.cap -= push;
      r.adj[e.to][e.rev].cap += push;
    }
    out.value += push;
  }
  out.flow = r.arc_flows(g);
  out.cost = static_cast<std::int64_t>(flow_cost<std::int64_t>(g, out.flow));
  return out;
}

// Minimum cost flow meeting sigma (inflow - outflow per vertex); nonnegative costs.
inline IntFlow min_cost_flow(const FlowNetwork& g, std::span<const std::int64_t> sigma) {
  const std::size_t n = g.num_vertices();
  if (sigma.size() != n) throw DimensionMismatch("demand vector size");
  detail::Residual r(n + 2);
  const auto S = static_cast<NodeId>(n), T = static_cast<NodeId>(n + 1);
  for (EdgeId e = 0; e < g.num_arcs(); ++e) r.add(g.arc(e).from, g.arc(e).to, g.arc(e).capacity, g.arc(e).cost, e);
  std::int64_t need = 0, total = 0;
  for (NodeId v = 0; v < n; ++v) {
    total += sigma[v];
    if (sigma[v] < 0) r.add(S, v, -sigma[v], 0, -1);
    if (sigma[v] > 0) {
      r.add(v, T, sigma[v], 0, -1);
      need += sigma[v];
    }
  }
  if (total != 0) throw ValidationError("demands do not sum to zero");
  auto [flow, cost] = detail::ssp(r, S, T, need);
  if (flow < need) throw Infeasible("demands cannot be routed");
  IntFlow out;
  out.value = flow;
  out.cost = cost;
  out.flow.assign(g.num_arcs(), 0);
  for (NodeId u = 0; u < n; ++u)
    for (const auto& e : r.adj[u])
      if (e.arc >= 0) out.flow[static_cast<std::size_t>(e.arc)] = g.arc(static_cast<EdgeId>(e.arc)).capacity - e.cap;
  return out;
}

// Maximum s-t flow of minimum cost.
inline IntFlow min_cost_max_flow(const FlowNetwork& g, NodeId s, NodeId t) {
  detail::Residual r(g.num_vertices());
  for (EdgeId e = 0; e < g.num_arcs(); ++e) r.add(g.arc(e).from, g.arc(e).to, g.arc(e).capacity, g.arc(e).cost, e);
  auto [flow, cost] = detail::ssp(r, s, t, std::numeric_limits<std::int64_t>::max() / 4);
  IntFlow out;
  out.value = flow;
  out.cost = cost;
  out.flow = r.arc_flows(g);
  return out;
}

// Minimum s-t cut capacity by enumerating vertex subsets; n <= 20.
inline std::int64_t exhaustive_min_cut(const FlowNetwork& g, NodeId s, NodeId t) {
  const std::size_t n = g.num_vertices();
  if (n > 20) throw TooLarge("exhaustive cut enumeration is limited to 20 vertices");
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (!(mask >> s & 1u) || (mask >> t & 1u)) continue;
    std::int64_t cut = 0;
    for (const auto& a : g.arcs())
      if ((mask >> a.from & 1u) && !(mask >> a.to & 1u)) cut += a.capacity;
    best = std::min(best, cut);
  }
  return best;
}

// Cheapest 0/1 flow meeting sigma by enumerating arc subsets; unit capacities, m <= 22.
inline std::optional<std::int64_t> exhaustive_unit_min_cost(const FlowNetwork& g, std::span<const std::int64_t> sigma) {
  const std::size_t m = g.num_arcs();
  if (m > 22) throw TooLarge("exhaustive flow enumeration is limited to 22 arcs");
  std::optional<std::int64_t> best;
  std::vector<std::int64_t> bal(g.num_vertices());
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    std::ranges::fill(bal, 0);
    std::int64_t c = 0;
    for (EdgeId e = 0; e < m; ++e) {
      if (!(mask >> e & 1u)) continue;
      bal[g.arc(e).to] += 1;
      bal[g.arc(e).from] -= 1;
      c += g.arc(e).cost;
    }
    if (!std::ranges::equal(bal, sigma)) continue;
    if (!best || c < *best) best = c;
  }
  return best;
}

}  // namespace cliqueflow::oracle
