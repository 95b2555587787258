#pragma once

// Rounding a fractional flow whose entries are multiples of delta to an
// integral one, one bit per phase, using cost-aware Eulerian orientation.

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "clique_sim.hpp"
#include "errors.hpp"
#include "euler_orient.hpp"
#include "graph.hpp"

namespace cliqueflow {

struct Terminals {
  NodeId s = 0;
  NodeId t = 0;
};

struct RoundingTask {
  const FlowNetwork* network = nullptr;
  std::span<const double> flow;
  double delta = 1.0;
  std::optional<Terminals> terminals;  // s-t form; without it the flow is rounded as a circulation with demands
  bool use_costs = false;
};

struct RoundingResult {
  std::vector<std::int64_t> flow;
  std::size_t orient_calls = 0;
  std::size_t phases = 0;
  bool closure_used = false;  // the t -> s closure edge carried an odd multiple at some phase
};

// log2(1/delta), or throws if 1/delta is not a power of two
inline std::size_t rounding_phases(double delta) {
  if (!(delta > 0.0) || delta > 1.0) throw std::invalid_argument("delta must lie in (0, 1]");
  int exp = 0;
  const double mant = std::frexp(1.0 / delta, &exp);
  if (mant != 0.5) throw std::invalid_argument("1/delta must be a power of two");
  return static_cast<std::size_t>(exp - 1);
}

inline RoundingResult flow_round(const RoundingTask& task, RoundLedger& ledger) {
  if (task.network == nullptr) throw std::invalid_argument("rounding task without a network");
  const FlowNetwork& net = *task.network;
  if (task.flow.size() != net.num_arcs()) throw DimensionMismatch("flow vector does not match arc count");
  const std::size_t phases = rounding_phases(task.delta);
  const std::size_t m = net.num_arcs();

  // flows in units of delta; the closure edge is the last entry when present
  std::vector<std::int64_t> units(m);
  for (EdgeId e = 0; e < m; ++e) {
    const double q = task.flow[e] / task.delta;
    const double r = std::round(q);
    if (std::abs(q - r) > 1e-9 * std::max(1.0, std::abs(q))) throw NotMultipleOfDelta(e);
    units[e] = static_cast<std::int64_t>(r);
  }
  std::vector<std::int64_t> cost(m, 0);
  std::int64_t abs_cost = 0;
  if (task.use_costs) {
    for (EdgeId e = 0; e < m; ++e) {
      cost[e] = net.arc(e).cost;
      abs_cost += cost[e] < 0 ? -cost[e] : cost[e];
    }
  }
  std::vector<NodeId> from(m), to(m);
  for (EdgeId e = 0; e < m; ++e) {
    from[e] = net.arc(e).from;
    to[e] = net.arc(e).to;
  }
  if (task.terminals) {
    const auto [s, t] = *task.terminals;
    if (s == t) throw std::invalid_argument("source equals sink");
    std::int64_t value = 0;
    for (EdgeId e = 0; e < m; ++e) {
      if (from[e] == s) value += units[e];
      if (to[e] == s) value -= units[e];
    }
    units.push_back(value);
    cost.push_back(-(abs_cost + 1));
    from.push_back(t);
    to.push_back(s);
  }

  RoundingResult out;
  out.phases = phases;
  std::int64_t step = 1;
  for (std::size_t p = 0; p < phases; ++p, step *= 2) {
    WeightedGraph odd(net.num_vertices());
    std::vector<EdgeId> original;
    std::vector<std::int64_t> odd_cost;
    for (EdgeId e = 0; e < units.size(); ++e) {
      if ((units[e] / step) % 2 == 0) continue;
      odd.add_edge(from[e], to[e], 1.0);
      original.push_back(e);
      odd_cost.push_back(cost[e]);
      if (e == m) out.closure_used = true;
    }
    OrientResult r;
    try {
      r = orient(odd, ledger, odd_cost);
    } catch (const OddDegree& err) {
      throw OddDegreeInternal("odd number of odd-multiple edges at vertex " + std::to_string(err.vertex) +
                              "; the input is not a flow");
    }
    ++out.orient_calls;
    for (EdgeId i = 0; i < original.size(); ++i) units[original[i]] += r.orientation.reversed[i] ? -step : step;
  }

  const std::int64_t scale = step;  // 1/delta
  out.flow.resize(m);
  for (EdgeId e = 0; e < m; ++e) {
    if (units[e] % scale != 0) throw std::logic_error("rounding left a fractional entry");
    out.flow[e] = units[e] / scale;
    if (out.flow[e] < 0 || out.flow[e] > net.arc(e).capacity) throw std::logic_error("rounding left the capacity range");
  }
  return out;
}

}  // namespace cliqueflow
