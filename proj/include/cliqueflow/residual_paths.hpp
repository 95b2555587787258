#pragma once

// Augmenting-path searches on the residual graph of an integral flow, run
// hop by hop inside the simulator so their rounds land in the ledger.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clique_sim.hpp"
#include "graph.hpp"

namespace cliqueflow {

struct ResidualStep {
  EdgeId arc = 0;
  bool forward = true;  // false: cancel flow on the arc
};

namespace detail {

struct BfsState {
  bool seen = false;
  bool frontier = false;
  NodeId parent = 0;
  ResidualStep via{};
};

}  // namespace detail

// Breadth-first search from s to t over arcs with spare capacity and arcs
// carrying flow (backwards). Every layer is one simulated round; the path is
// then walked back from t, one round per hop.
inline std::optional<std::vector<ResidualStep>> bfs_augmenting_path(const FlowNetwork& g,
                                                                     std::span<const std::int64_t> flow, NodeId s,
                                                                     NodeId t, RoundLedger& ledger,
                                                                     const std::string& phase) {
  const std::size_t n = g.num_vertices();
  // residual neighbours, first usable arc per neighbour
  std::vector<std::vector<std::pair<NodeId, ResidualStep>>> nbrs(n);
  {
    for (EdgeId e = 0; e < g.num_arcs(); ++e) {
      const auto& a = g.arc(e);
      if (flow[e] < a.capacity) nbrs[a.from].push_back({a.to, {e, true}});
      if (flow[e] > 0) nbrs[a.to].push_back({a.from, {e, false}});
    }
    for (auto& list : nbrs) {
      std::ranges::stable_sort(list, [](const auto& x, const auto& y) { return x.first < y.first; });
      auto last = std::unique(list.begin(), list.end(), [](const auto& x, const auto& y) { return x.first == y.first; });
      list.erase(last, list.end());
    }
  }
  CliqueNetwork<detail::BfsState> net(std::max<std::size_t>(n, 1), ledger);
  net.set_phase(phase);
  net.state(s).seen = true;
  net.state(s).frontier = true;
  bool reached = s == t;
  bool active = true;
  while (!reached && active) {
    bool any = false;
    net.run_round([&](NodeId v, detail::BfsState& st, std::span<const Message>, Outbox& out) {
      if (!st.frontier) return;
      st.frontier = false;
      for (const auto& [w, step] : nbrs[v]) out.send(w, {step.arc, step.forward ? 1u : 0u});
    });
    for (NodeId v = 0; v < n; ++v) {
      auto& st = net.state(v);
      auto box = net.inbox(v);
      if (st.seen || box.empty()) continue;
      // inbox is sorted by sender: the smallest sender becomes the parent
      st.seen = true;
      st.frontier = true;
      st.parent = box.front().src;
      st.via = {static_cast<EdgeId>(box.front().payload[0]), box.front().payload[1] == 1};
      any = true;
      if (v == t) reached = true;
    }
    active = any;
  }
  if (!reached) return std::nullopt;
  std::vector<ResidualStep> path;
  for (NodeId v = t; v != s; v = net.state(v).parent) {
    const NodeId p = net.state(v).parent;
    path.push_back(net.state(v).via);
    net.run_round([&](NodeId u, detail::BfsState&, std::span<const Message>, Outbox& out) {
      if (u == v) out.send(p, {1});
    });
  }
  std::ranges::reverse(path);
  return path;
}

inline std::int64_t bottleneck(const FlowNetwork& g, std::span<const std::int64_t> flow,
                               const std::vector<ResidualStep>& path) {
  std::int64_t b = std::numeric_limits<std::int64_t>::max();
  for (const auto& st : path) b = std::min(b, st.forward ? g.arc(st.arc).capacity - flow[st.arc] : flow[st.arc]);
  return b;
}

inline void push_along(std::span<std::int64_t> flow, const std::vector<ResidualStep>& path, std::int64_t amount) {
  for (const auto& st : path) flow[st.arc] += st.forward ? amount : -amount;
}

}  // namespace cliqueflow
