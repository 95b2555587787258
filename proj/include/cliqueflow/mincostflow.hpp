#pragma once

// Unit-capacity minimum cost flow: the network becomes a bipartite b-matching
// problem (one Q vertex per arc, matched either to its tail or to its head),
// an interior point method with perturbations drives it towards optimality,
// and a repair phase rounds the result and finishes it with shortest
// augmenting paths under potentials.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "clique_sim.hpp"
#include "errors.hpp"
#include "flow_round.hpp"
#include "graph.hpp"
#include "laplacian_solver.hpp"

namespace cliqueflow {

struct BipartiteLift {
  std::size_t n0 = 0;  // original vertices
  std::size_t m0 = 0;  // original arcs, first in the arc list
  NodeId aux = 0;      // auxiliary vertex, the last P vertex
  std::size_t p = 0;
  std::size_t q = 0;  // one Q vertex per arc of the balanced network
  std::vector<NodeId> tail, head;
  std::vector<std::int64_t> cost;
  std::vector<std::int64_t> b;  // P vertices first, then Q
  std::int64_t aux_cost = 0;

  // edge 2k joins tail_k to Q vertex k at the arc's cost, edge 2k+1 joins head_k at cost 0
  std::size_t num_edges() const noexcept { return 2 * q; }
  std::size_t num_vertices() const noexcept { return p + q; }
  NodeId edge_p(EdgeId e) const { return e % 2 == 0 ? tail[e / 2] : head[e / 2]; }
  NodeId edge_q(EdgeId e) const { return static_cast<NodeId>(p + e / 2); }
  std::int64_t edge_cost(EdgeId e) const { return e % 2 == 0 ? cost[e / 2] : 0; }
  static EdgeId partner(EdgeId e) noexcept { return e ^ EdgeId{1}; }
};

struct McfState {
  BipartiteLift lift;
  std::vector<double> f, s, nu;
  std::vector<double> y;  // P then Q
  std::vector<double> star_resistance;  // per P vertex; infinite when the vertex has no edges
  double mu_hat = 0.0;
  double c_rho = 0.0;
  double c_T = 0.0;
  double eta = 1.0 / 14;
  double log_w = 1.0;
  std::size_t m = 1;  // original arc count used by the schedule

  double gap() const {
    double g = 0.0;
    for (std::size_t e = 0; e < f.size(); ++e) g += f[e] * s[e];
    return g;
  }
};

struct McfOptions {
  double gap_target = 0.0;  // stop early once sum f*s falls below it; 0 means 1/(4|E|)
  bool early_exit = true;
  std::size_t max_perturbations_per_check = 64;
  double solver_epsilon = 1e-10;
  std::size_t max_halvings = 40;
  double perturbation_constant = 1.0;
};

inline double nu_norm(std::span<const double> x, std::span<const double> nu, double p) {
  double acc = 0.0;
  for (std::size_t e = 0; e < x.size(); ++e) acc += nu[e] * std::pow(std::abs(x[e]), p);
  return std::pow(acc, 1.0 / p);
}

namespace detail {

inline void validate_mcf_input(const FlowNetwork& g, std::span<const std::int64_t> sigma) {
  if (sigma.size() != g.num_vertices()) throw DimensionMismatch("demand vector size");
  if (std::accumulate(sigma.begin(), sigma.end(), std::int64_t{0}) != 0)
    throw ValidationError("demands do not sum to zero");
  for (const auto& a : g.arcs()) {
    if (a.capacity != 1) throw std::invalid_argument("min cost flow expects unit capacities");
    if (a.cost < 0) throw std::invalid_argument("min cost flow expects nonnegative costs");
  }
}

}  // namespace detail

// sigma is inflow minus outflow; the b-matching uses net outflow, hence the sign flips below.
inline McfState initialization(const FlowNetwork& g, std::span<const std::int64_t> sigma) {
  detail::validate_mcf_input(g, sigma);
  McfState st;
  auto& L = st.lift;
  L.n0 = g.num_vertices();
  L.m0 = g.num_arcs();
  L.aux = static_cast<NodeId>(L.n0);
  L.p = L.n0 + 1;
  std::int64_t total_cost = 0, max_cost = 0;
  for (const auto& a : g.arcs()) {
    L.tail.push_back(a.from);
    L.head.push_back(a.to);
    L.cost.push_back(a.cost);
    total_cost += a.cost;
    max_cost = std::max(max_cost, a.cost);
  }
  // one more than the total cost, so routing through the auxiliary vertex never pays off
  L.aux_cost = total_cost + 1;
  std::vector<std::int64_t> in(L.n0, 0), out(L.n0, 0);
  for (const auto& a : g.arcs()) {
    ++out[a.from];
    ++in[a.to];
  }
  for (NodeId v = 0; v < L.n0; ++v) {
    // twice sigma(v) + in/2 - out/2, with the net-outflow sign
    const std::int64_t twice_t = -2 * sigma[v] + in[v] - out[v];
    const NodeId from = twice_t > 0 ? v : L.aux;
    const NodeId to = twice_t > 0 ? L.aux : v;
    for (std::int64_t k = 0; k < std::abs(twice_t); ++k) {
      L.tail.push_back(from);
      L.head.push_back(to);
      L.cost.push_back(L.aux_cost);
    }
  }
  L.q = L.tail.size();
  std::vector<std::int64_t> in1(L.p, 0);
  for (std::size_t k = 0; k < L.q; ++k) ++in1[L.head[k]];
  L.b.assign(L.p + L.q, 1);
  for (NodeId v = 0; v < L.p; ++v) L.b[v] = (v < L.n0 ? -sigma[v] : 0) + in1[v];
  for (NodeId v = 0; v < L.n0; ++v)
    if (L.b[v] < 0) throw NonHalfIntegralT("vertex " + std::to_string(v) + " has a negative matching demand");

  const std::size_t E = L.num_edges();
  double c_inf = 1.0;
  for (EdgeId e = 0; e < E; ++e) c_inf = std::max(c_inf, static_cast<double>(L.edge_cost(e)));
  st.y.assign(L.num_vertices(), 0.0);
  for (NodeId v = 0; v < L.p; ++v) st.y[v] = c_inf;
  st.f.assign(E, 0.5);
  st.s.resize(E);
  st.nu.resize(E);
  for (EdgeId e = 0; e < E; ++e) {
    st.s[e] = static_cast<double>(L.edge_cost(e)) + st.y[L.edge_p(e)] - st.y[L.edge_q(e)];
    st.nu[e] = st.s[e] / (2.0 * c_inf);
  }
  st.mu_hat = c_inf;
  st.log_w = std::max(1.0, std::log2(static_cast<double>(std::max<std::int64_t>(max_cost, 1))));
  st.c_rho = 400.0 * std::sqrt(3.0) * std::cbrt(st.log_w);
  st.c_T = 3.0 * st.c_rho * st.log_w;
  st.m = std::max<std::size_t>(L.m0, 1);
  st.star_resistance.assign(L.p, std::numeric_limits<double>::infinity());
  return st;
}

// a(v) sums nu over v's edges and their partners; the star edge to v0 gets resistance m^{1+2eta}/a(v).
inline void set_star_resistances(McfState& st) {
  const auto& L = st.lift;
  std::vector<double> a(L.p, 0.0);
  for (EdgeId e = 0; e < L.num_edges(); ++e) a[L.edge_p(e)] += st.nu[e] + st.nu[BipartiteLift::partner(e)];
  const double scale = std::pow(static_cast<double>(st.m), 1.0 + 2.0 * st.eta);
  for (NodeId v = 0; v < L.p; ++v)
    st.star_resistance[v] = a[v] > 0.0 ? scale / a[v] : std::numeric_limits<double>::infinity();
}

struct McfElectrical {
  std::vector<double> flow;  // on bipartite edges, oriented P -> Q
  Vector potentials;
};

namespace detail {

// Potentials for the given edge resistances plus the star; the demand is the residue to produce.
inline McfElectrical mcf_solve(const McfState& st, std::span<const double> resistance, const Vector& demand,
                               RoundLedger& ledger, const McfOptions& opt) {
  const auto& L = st.lift;
  const std::size_t N = L.num_vertices() + 1;
  const auto v0 = static_cast<NodeId>(N - 1);
  WeightedGraph g(N);
  for (EdgeId e = 0; e < L.num_edges(); ++e) g.add_edge(L.edge_p(e), L.edge_q(e), 1.0 / resistance[e]);
  for (NodeId v = 0; v < L.p; ++v)
    if (std::isfinite(st.star_resistance[v])) g.add_edge(v0, v, 1.0 / st.star_resistance[v]);
  Vector b = Vector::Zero(static_cast<Eigen::Index>(N));
  b.head(demand.size()) = demand;
  McfElectrical out;
  try {
    out.potentials = solve_distributed(g, b, opt.solver_epsilon, ledger).y;
  } catch (const NoConvergence& e) {
    throw SolverFailure(e.what());
  }
  out.flow.resize(L.num_edges());
  for (EdgeId e = 0; e < L.num_edges(); ++e)
    out.flow[e] = (out.potentials[L.edge_q(e)] - out.potentials[L.edge_p(e)]) / resistance[e];
  return out;
}

inline Vector matching_demand(const BipartiteLift& L) {
  Vector d(static_cast<Eigen::Index>(L.num_vertices()));
  for (NodeId v = 0; v < L.num_vertices(); ++v) d[v] = v < L.p ? -static_cast<double>(L.b[v]) : 1.0;
  return d;
}

inline Vector residue_vector(const BipartiteLift& L, std::span<const double> x) {
  Vector r = Vector::Zero(static_cast<Eigen::Index>(L.num_vertices()));
  for (EdgeId e = 0; e < L.num_edges(); ++e) {
    r[L.edge_q(e)] += x[e];
    r[L.edge_p(e)] -= x[e];
  }
  return r;
}

}  // namespace detail

// First half of a progress step: the electrical flow routing the demands under r = nu/f^2.
inline McfElectrical demand_flow(const McfState& st, RoundLedger& ledger, const McfOptions& opt = {}) {
  std::vector<double> r(st.f.size());
  for (std::size_t e = 0; e < r.size(); ++e) r[e] = st.nu[e] / (st.f[e] * st.f[e]);
  return detail::mcf_solve(st, r, detail::matching_demand(st.lift), ledger, opt);
}

inline std::vector<double> mcf_congestion(const McfState& st, std::span<const double> electrical) {
  std::vector<double> rho(st.f.size());
  for (std::size_t e = 0; e < rho.size(); ++e) rho[e] = std::abs(electrical[e]) / st.f[e];
  return rho;
}

// For every Q vertex, double the weight of its more congested edge and raise
// the slack of both edges by lowering the Q vertex's dual.
inline void perturbation(McfState& st, std::span<const double> rho) {
  const auto& L = st.lift;
  for (std::size_t k = 0; k < L.q; ++k) {
    const EdgeId first = 2 * k, second = 2 * k + 1;
    const EdgeId e = rho[second] > rho[first] ? second : first;
    const EdgeId bar = BipartiteLift::partner(e);
    const double slack = st.s[e];
    st.y[L.p + k] -= slack;
    st.s[e] += slack;
    st.s[bar] += slack;
    // the partner's weight uses nu_e from before the doubling
    const double old_nu = st.nu[e];
    st.nu[e] = 2.0 * old_nu;
    st.nu[bar] += old_nu * st.f[bar] / st.f[e];
  }
}

struct ProgressReport {
  double delta = 0.0;
  std::vector<double> rho;
  std::size_t halvings = 0;
};

inline ProgressReport progress(McfState& st, RoundLedger& ledger, const McfOptions& opt = {}) {
  const auto& L = st.lift;
  const std::size_t E = L.num_edges();
  const auto hat = demand_flow(st, ledger, opt);
  ProgressReport rep;
  rep.rho = mcf_congestion(st, hat.flow);
  double delta = std::min(1.0 / (8.0 * nu_norm(rep.rho, st.nu, 4.0)), 1.0 / 8);
  for (std::size_t attempt = 0; attempt <= opt.max_halvings; ++attempt, delta /= 2, ++rep.halvings) {
    std::vector<double> f1(E), s1(E), sharp(E), r(E);
    bool ok = true;
    // the potentials come from r = nu/f^2 and are converted to slack units by mu_hat
    const double k = st.mu_hat * delta / (1.0 - delta);
    for (EdgeId e = 0; e < E && ok; ++e) {
      const double dphi = hat.potentials[L.edge_q(e)] - hat.potentials[L.edge_p(e)];
      f1[e] = (1.0 - delta) * st.f[e] + delta * hat.flow[e];
      s1[e] = st.s[e] - k * dphi;
      ok = f1[e] > 0.0 && s1[e] > 0.0;
      if (!ok) break;
      sharp[e] = (1.0 - delta) * st.f[e] * st.s[e] / s1[e];
      r[e] = s1[e] * s1[e] / ((1.0 - delta) * st.f[e] * st.s[e]);
    }
    if (!ok) continue;
    std::vector<double> diff(E);
    for (EdgeId e = 0; e < E; ++e) diff[e] = f1[e] - sharp[e];
    const auto tilde = detail::mcf_solve(st, r, detail::residue_vector(L, diff), ledger, opt);
    std::vector<double> f2(E), s2(E);
    for (EdgeId e = 0; e < E && ok; ++e) {
      f2[e] = sharp[e] + tilde.flow[e];
      s2[e] = s1[e] - s1[e] * tilde.flow[e] / sharp[e];
      ok = f2[e] > 0.0 && s2[e] > 0.0;
    }
    if (!ok) continue;
    st.f = std::move(f2);
    st.s = std::move(s2);
    for (NodeId v = 0; v < L.num_vertices(); ++v) st.y[v] += k * hat.potentials[v] + tilde.potentials[v];
    st.mu_hat *= 1.0 - delta;
    rep.delta = delta;
    return rep;
  }
  throw InteriorViolated("progress step could not keep flows and slacks positive");
}

struct RepairStats {
  std::size_t rounded_matched = 0;
  std::size_t cycles_cancelled = 0;
  std::size_t augmentations = 0;
  std::size_t shortest_path_calls = 0;
  std::size_t reduced_cost_checks = 0;
  std::size_t reduced_cost_violations = 0;
  double rounding_unit = 0.0;
};

namespace detail {

inline constexpr std::int64_t kFar = std::numeric_limits<std::int64_t>::max() / 4;

struct ResidualArc {
  NodeId to;
  std::int64_t cost;
  EdgeId edge;  // bipartite edge, or kNoArc for the super source / sink arcs
};
inline constexpr EdgeId kNoArc = std::numeric_limits<EdgeId>::max();

// Residual graph of a b-matching plus a super source S (arcs to deficient P
// vertices) and super sink T (arcs from deficient Q vertices).
struct MatchingResidual {
  const BipartiteLift* lift;
  std::vector<std::vector<ResidualArc>> out;
  NodeId S, T;

  MatchingResidual(const BipartiteLift& L, std::span<const std::uint8_t> matched) : lift(&L) {
    const std::size_t N = L.num_vertices();
    S = static_cast<NodeId>(N);
    T = static_cast<NodeId>(N + 1);
    out.assign(N + 2, {});
    std::vector<std::int64_t> deg(N, 0);
    for (EdgeId e = 0; e < L.num_edges(); ++e) {
      const NodeId u = L.edge_p(e), v = L.edge_q(e);
      if (matched[e]) {
        out[v].push_back({u, -L.edge_cost(e), e});
        ++deg[u];
        ++deg[v];
      } else {
        out[u].push_back({v, L.edge_cost(e), e});
      }
    }
    for (NodeId v = 0; v < N; ++v) {
      if (deg[v] >= L.b[v]) continue;
      if (v < L.p)
        out[S].push_back({v, 0, kNoArc});
      else
        out[v].push_back({T, 0, kNoArc});
    }
  }
  std::size_t size() const { return out.size(); }
  bool has_deficit() const { return !out[S].empty(); }
};

struct RelaxState {
  std::int64_t dist = kFar;
  bool changed = false;
  NodeId parent = 0;
  EdgeId via = kNoArc;
  std::size_t updated_round = 0;
};

struct RelaxResult {
  std::vector<std::int64_t> dist;
  std::vector<NodeId> parent;
  std::vector<EdgeId> via;
  std::optional<NodeId> still_changing;  // a vertex improved in the last allowed round
};

// Bellman-Ford by hop relaxation: every round, vertices whose distance improved
// tell their residual out-neighbours. Sources start at the given distances.
inline RelaxResult relax(const MatchingResidual& R, std::span<const std::int64_t> start,
                         std::span<const std::int64_t> potential, RoundLedger& ledger, const std::string& phase) {
  const std::size_t N = R.size();
  CliqueNetwork<RelaxState> net(N, ledger);
  net.set_phase(phase);
  for (NodeId v = 0; v < N; ++v) {
    net.state(v).dist = start[v];
    net.state(v).changed = start[v] < kFar;
  }
  RelaxResult res;
  // dedupe parallel residual arcs by target, keeping the cheapest
  std::vector<std::vector<ResidualArc>> best(N);
  for (NodeId u = 0; u < N; ++u) {
    auto arcs = R.out[u];
    std::ranges::stable_sort(arcs, [](const auto& a, const auto& b) { return a.to != b.to ? a.to < b.to : a.cost < b.cost; });
    for (const auto& a : arcs)
      if (best[u].empty() || best[u].back().to != a.to) best[u].push_back(a);
  }
  std::size_t round = 0;
  bool any = true;
  while (any && round <= N) {
    ++round;
    any = false;
    net.run_round([&](NodeId u, RelaxState& st, std::span<const Message>, Outbox& box) {
      if (!st.changed) return;
      st.changed = false;
      for (const auto& a : best[u]) {
        const std::int64_t reduced = a.cost + potential[u] - potential[a.to];
        box.send(a.to, {to_word(st.dist + reduced), static_cast<Word>(a.edge)});
      }
    });
    for (NodeId v = 0; v < N; ++v) {
      auto& st = net.state(v);
      for (const auto& m : net.inbox(v)) {
        const std::int64_t d = word_to_int(m.payload[0]);
        if (d < st.dist) {
          st.dist = d;
          st.parent = m.src;
          st.via = static_cast<EdgeId>(m.payload[1]);
          st.changed = true;
          st.updated_round = round;
        }
      }
      if (st.changed) {
        any = true;
        if (round > N - 1 && !res.still_changing) res.still_changing = v;
      }
    }
  }
  for (NodeId v = 0; v < N; ++v) {
    res.dist.push_back(net.state(v).dist);
    res.parent.push_back(net.state(v).parent);
    res.via.push_back(net.state(v).via);
  }
  return res;
}

}  // namespace detail

// Round the interior point flow to a b-matching that never exceeds the
// demands, make it optimal for its own degrees, then augment along shortest
// paths until every demand is met. Returns the matching per bipartite edge.
inline std::vector<std::uint8_t> repairing(const McfState& st, RoundLedger& ledger, RepairStats& stats) {
  const auto& L = st.lift;
  const std::size_t E = L.num_edges(), N = L.num_vertices();
  // truncation on a grid of power-of-two units
  double unit = 1.0;
  while (unit > 1.0 / (2.0 * static_cast<double>(std::max<std::size_t>(E, 1)))) unit /= 2;
  stats.rounding_unit = unit;
  const auto per_unit = static_cast<std::int64_t>(std::llround(1.0 / unit));
  std::vector<std::int64_t> units(E);
  for (EdgeId e = 0; e < E; ++e) units[e] = static_cast<std::int64_t>(std::floor(std::clamp(st.f[e], 0.0, 1.0) / unit));
  std::vector<std::vector<EdgeId>> at(N);
  for (EdgeId e = 0; e < E; ++e) {
    at[L.edge_p(e)].push_back(e);
    at[L.edge_q(e)].push_back(e);
  }
  for (bool changed = true; changed;) {
    changed = false;
    for (NodeId v = 0; v < N; ++v) {
      std::int64_t sum = 0;
      for (auto e : at[v]) sum += units[e];
      std::int64_t over = sum - L.b[v] * per_unit;
      if (over <= 0) continue;
      changed = true;
      auto edges = at[v];
      std::ranges::stable_sort(edges, [&](EdgeId a, EdgeId b) { return units[a] > units[b]; });
      for (auto e : edges) {
        const std::int64_t cut = std::min(over, units[e]);
        units[e] -= cut;
        over -= cut;
        if (over == 0) break;
      }
    }
  }
  // rounding network: s -> P -> Q -> t
  FlowNetwork rn(N + 2);
  const auto s = static_cast<NodeId>(N), t = static_cast<NodeId>(N + 1);
  for (EdgeId e = 0; e < E; ++e) rn.add_arc(L.edge_p(e), L.edge_q(e), 1, L.edge_cost(e));
  std::vector<double> frac(E);
  for (EdgeId e = 0; e < E; ++e) frac[e] = static_cast<double>(units[e]) * unit;
  for (NodeId v = 0; v < N; ++v) {
    double sum = 0.0;
    for (auto e : at[v]) sum += frac[e];
    if (v < L.p)
      rn.add_arc(s, v, L.b[v], 0);
    else
      rn.add_arc(v, t, 1, 0);
    frac.push_back(sum);
  }
  const auto rounded = flow_round({&rn, frac, unit, Terminals{s, t}, true}, ledger).flow;
  std::vector<std::uint8_t> matched(E);
  for (EdgeId e = 0; e < E; ++e) {
    matched[e] = rounded[e] > 0;
    stats.rounded_matched += matched[e];
  }

  // cancel negative cycles until the matching is optimal for its own degrees
  const std::vector<std::int64_t> zero_potential(N + 2, 0);
  std::vector<std::int64_t> potential(N + 2, 0);
  for (;;) {
    detail::MatchingResidual R(L, matched);
    const std::vector<std::int64_t> start(R.size(), 0);
    auto res = detail::relax(R, start, zero_potential, ledger, "mincost:cycle-cancel");
    if (!res.still_changing) {
      potential = res.dist;
      break;
    }
    NodeId v = *res.still_changing;
    for (std::size_t i = 0; i < R.size(); ++i) v = res.parent[v];
    std::vector<EdgeId> cycle;
    NodeId w = v;
    do {
      cycle.push_back(res.via[w]);
      w = res.parent[w];
    } while (w != v);
    for (auto e : cycle) {
      if (e == detail::kNoArc) throw std::logic_error("negative cycle through a terminal");
      matched[e] ^= 1;
    }
    ++stats.cycles_cancelled;
  }

  // shortest augmenting paths from the super source to the super sink
  for (;;) {
    detail::MatchingResidual R(L, matched);
    if (!R.has_deficit()) break;
    std::vector<std::int64_t> start(R.size(), detail::kFar);
    start[R.S] = 0;
    auto res = detail::relax(R, start, potential, ledger, "mincost:repair-sp");
    ++stats.shortest_path_calls;
    for (NodeId u = 0; u < R.size(); ++u) {
      if (res.dist[u] >= detail::kFar) continue;
      for (const auto& a : R.out[u]) {
        ++stats.reduced_cost_checks;
        if (a.cost + potential[u] - potential[a.to] < 0) ++stats.reduced_cost_violations;
      }
    }
    if (res.dist[R.T] >= detail::kFar) throw Infeasible("no augmenting path meets the remaining demands");
    const std::int64_t reach = res.dist[R.T];
    for (NodeId v = 0; v < R.size(); ++v) potential[v] += std::min(res.dist[v], reach);
    std::size_t hops = 0;
    for (NodeId v = R.T; v != R.S; v = res.parent[v], ++hops)
      if (res.via[v] != detail::kNoArc) matched[res.via[v]] ^= 1;
    ledger.charge("mincost:repair-augment", hops);
    ++stats.augmentations;
  }
  return matched;
}

struct McfStats {
  std::size_t lifted_p = 0;
  std::size_t lifted_q = 0;
  std::size_t aux_arcs = 0;
  std::size_t outer_planned = 0;
  std::size_t inner_planned = 0;
  std::size_t outer_run = 0;
  std::size_t progress_steps = 0;
  std::size_t perturbation_checks = 0;
  std::size_t perturbations = 0;
  std::size_t perturbation_stalls = 0;  // while loops cut off by the per-check limit
  double perturbation_bound = 0.0;
  bool perturbation_bound_held = true;
  std::size_t halvings = 0;
  bool interior_held = true;
  bool early_exit = false;
  double initial_gap = 0.0;
  double final_gap = 0.0;
  RepairStats repair;
};

struct McfResult {
  std::vector<std::int64_t> flow;
  std::int64_t cost = 0;
  McfStats stats;
};

inline McfResult min_cost_flow(const FlowNetwork& g, std::span<const std::int64_t> sigma, RoundLedger& ledger,
                               const McfOptions& opt = {}) {
  detail::validate_mcf_input(g, sigma);
  McfResult res;
  res.flow.assign(g.num_arcs(), 0);
  if (std::ranges::all_of(sigma, [](std::int64_t x) { return x == 0; })) return res;

  auto st = initialization(g, sigma);
  const auto& L = st.lift;
  auto& stats = res.stats;
  stats.lifted_p = L.p;
  stats.lifted_q = L.q;
  stats.aux_arcs = L.q - L.m0;
  const double md = static_cast<double>(st.m);
  stats.outer_planned = static_cast<std::size_t>(std::ceil(st.c_T * std::pow(md, 0.5 - 3.0 * st.eta)));
  stats.inner_planned = static_cast<std::size_t>(std::ceil(std::pow(md, 2.0 * st.eta)));
  stats.perturbation_bound = opt.perturbation_constant * std::pow(md, 3.0 / 7) * std::pow(st.log_w, 3.0);
  const double guard = st.c_rho * std::pow(md, 0.5 - st.eta);
  const double target = opt.gap_target > 0.0 ? opt.gap_target : 1.0 / (4.0 * static_cast<double>(L.num_edges()));
  stats.initial_gap = st.gap();

  std::optional<std::vector<double>> rho;
  bool done = false;
  try {
    for (std::size_t i = 0; i < stats.outer_planned && !done; ++i) {
      ++stats.outer_run;
      set_star_resistances(st);
      ledger.charge("mincost:ipm", 1);
      for (std::size_t j = 0; j < stats.inner_planned && !done; ++j) {
        if (!rho) rho = mcf_congestion(st, demand_flow(st, ledger, opt).flow);
        ++stats.perturbation_checks;
        std::size_t count = 0;
        while (nu_norm(*rho, st.nu, 3.0) > guard) {
          if (count == opt.max_perturbations_per_check) {
            ++stats.perturbation_stalls;
            break;
          }
          perturbation(st, *rho);
          ledger.charge("mincost:perturb", 1);
          rho = mcf_congestion(st, demand_flow(st, ledger, opt).flow);
          ++count;
          ++stats.perturbations;
        }
        auto rep = progress(st, ledger, opt);
        stats.halvings += rep.halvings;
        rho = std::move(rep.rho);
        ++stats.progress_steps;
        if (opt.early_exit && st.gap() <= target) {
          done = true;
          stats.early_exit = true;
        }
      }
    }
  } catch (const InteriorViolated&) {
    stats.interior_held = false;
  }
  stats.final_gap = st.gap();
  stats.perturbation_bound_held = static_cast<double>(stats.perturbations) <= stats.perturbation_bound;

  const auto matched = repairing(st, ledger, stats.repair);
  for (std::size_t k = L.m0; k < L.q; ++k)
    if (matched[2 * k]) throw Infeasible("demands cannot be routed without the auxiliary vertex");
  for (EdgeId a = 0; a < g.num_arcs(); ++a) res.flow[a] = matched[2 * a];
  const auto r = residue<std::int64_t>(g, res.flow);
  for (NodeId v = 0; v < g.num_vertices(); ++v)
    if (r[v] != static_cast<double>(sigma[v])) throw std::logic_error("repaired flow misses a demand");
  res.cost = static_cast<std::int64_t>(flow_cost<std::int64_t>(g, res.flow));
  return res;
}

// Maximum s-t flow of minimum cost: binary search on the value, each probe a demand problem.
inline McfResult min_cost_max_st_flow(const FlowNetwork& g, NodeId s, NodeId t, RoundLedger& ledger,
                                      const McfOptions& opt = {}) {
  if (s >= g.num_vertices() || t >= g.num_vertices()) throw std::out_of_range("terminal outside the vertex range");
  if (s == t) throw std::invalid_argument("source equals sink");
  std::int64_t out_cap = 0, in_cap = 0;
  for (const auto& a : g.arcs()) {
    if (a.from == s) out_cap += a.capacity;
    if (a.to == t) in_cap += a.capacity;
  }
  std::int64_t lo = 0, hi = std::min(out_cap, in_cap);
  McfResult best;
  best.flow.assign(g.num_arcs(), 0);
  std::vector<std::int64_t> sigma(g.num_vertices(), 0);
  while (lo < hi) {
    const std::int64_t mid = lo + (hi - lo + 1) / 2;
    sigma[s] = -mid;
    sigma[t] = mid;
    try {
      best = min_cost_flow(g, sigma, ledger, opt);
      lo = mid;
    } catch (const Infeasible&) {
      hi = mid - 1;
    }
  }
  return best;
}

}  // namespace cliqueflow
