#pragma once

// Interior point maximum flow on the lifted undirected graph: electrical
// augmentation steps with a centering correction, edge boosting when the
// congestion is too spread out, then rounding and augmenting paths on the
// original network.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "clique_sim.hpp"
#include "errors.hpp"
#include "flow_round.hpp"
#include "graph.hpp"
#include "laplacian_solver.hpp"
#include "residual_paths.hpp"

namespace cliqueflow {

inline constexpr double kUnbounded = std::numeric_limits<double>::infinity();
inline constexpr EdgeId kNoEdge = std::numeric_limits<EdgeId>::max();

struct LiftedEdge {
  NodeId a = 0;
  NodeId b = 0;            // positive flow runs a -> b
  double cap_fwd = 0.0;    // room for flow a -> b at zero flow
  double cap_back = 0.0;   // room for flow b -> a at zero flow
};

struct IpmState {
  std::size_t n = 0;
  NodeId s = 0;
  NodeId t = 0;
  std::vector<LiftedEdge> edges;
  std::vector<double> flow;
  std::vector<double> y;

  double room_fwd(EdgeId e, double f) const { return edges[e].cap_fwd - f; }
  double room_back(EdgeId e, double f) const { return edges[e].cap_back + f; }
  double slack(EdgeId e, double f) const { return std::min(room_fwd(e, f), room_back(e, f)); }

  double resistance(EdgeId e, double f) const {
    const double p = room_fwd(e, f), q = room_back(e, f);
    return (std::isinf(p) ? 0.0 : 1.0 / (p * p)) + (std::isinf(q) ? 0.0 : 1.0 / (q * q));
  }

  // derivative of the log barrier, which the duals track at a centred point
  double barrier_gradient(EdgeId e, double f) const {
    const double p = room_fwd(e, f), q = room_back(e, f);
    return (std::isinf(p) ? 0.0 : 1.0 / p) - (std::isinf(q) ? 0.0 : 1.0 / q);
  }

  bool interior(std::span<const double> f) const {
    for (EdgeId e = 0; e < edges.size(); ++e)
      if (!(room_fwd(e, f[e]) > 0.0) || !(room_back(e, f[e]) > 0.0)) return false;
    return true;
  }

  WeightedGraph conductances(std::span<const double> f) const {
    WeightedGraph g(n);
    for (EdgeId e = 0; e < edges.size(); ++e) g.add_edge(edges[e].a, edges[e].b, 1.0 / resistance(e, f[e]));
    return g;
  }

  // inflow minus outflow
  std::vector<double> residue_of(std::span<const double> f) const {
    std::vector<double> r(n, 0.0);
    for (EdgeId e = 0; e < edges.size(); ++e) {
      r[edges[e].b] += f[e];
      r[edges[e].a] -= f[e];
    }
    return r;
  }
};

struct LiftedNetwork {
  IpmState state;
  std::vector<EdgeId> arc_edge;  // lifted copy (u, v) of every arc; kNoEdge for arcs without capacity
  std::vector<int> arc_sign;     // +1 when positive flow on arc_edge runs along the arc
  std::size_t preconditioning = 0;
  std::size_t positive_arcs = 0;
};

// m preconditioning edges between t and s with capacity 2U, then for every
// arc (u, v) the edges (u, v), (s, v), (u, t). Copies that would be loops
// (arcs into s or out of t) are dropped.
inline LiftedNetwork precondition_and_lift(const FlowNetwork& g, NodeId s, NodeId t, std::int64_t max_cap) {
  if (s >= g.num_vertices() || t >= g.num_vertices()) throw std::out_of_range("terminal outside the vertex range");
  if (s == t) throw std::invalid_argument("source equals sink");
  LiftedNetwork ln;
  auto& st = ln.state;
  st.n = g.num_vertices();
  st.s = s;
  st.t = t;
  for (const auto& a : g.arcs()) ln.positive_arcs += a.capacity > 0;
  const double two_u = 2.0 * static_cast<double>(std::max<std::int64_t>(max_cap, 1));
  for (std::size_t i = 0; i < ln.positive_arcs; ++i) st.edges.push_back({t, s, two_u, two_u});
  ln.preconditioning = st.edges.size();
  ln.arc_edge.assign(g.num_arcs(), kNoEdge);
  ln.arc_sign.assign(g.num_arcs(), 1);
  for (EdgeId e = 0; e < g.num_arcs(); ++e) {
    const auto& a = g.arc(e);
    if (a.capacity <= 0) continue;
    const auto c = static_cast<double>(a.capacity);
    ln.arc_edge[e] = static_cast<EdgeId>(st.edges.size());
    st.edges.push_back({a.from, a.to, c, c});
    if (a.to != s) st.edges.push_back({s, a.to, c, c});
    if (a.from != t) st.edges.push_back({a.from, t, c, c});
  }
  st.flow.assign(st.edges.size(), 0.0);
  st.y.assign(st.n, 0.0);
  return ln;
}

struct MaxFlowOptions {
  double alpha_step = 0.5;
  double eta_log_constant = 1.0;  // weight of the log_m log2(mU) term
  double eta_floor = 1.0 / 28;
  double loop_constant = 100.0;
  double solver_epsilon = 1e-10;
  double interior_floor = 1e-9;  // relative to U
  std::size_t max_halvings = 40;
  std::size_t max_path_length = 64;  // longer boosting paths are skipped
};

struct Electrical {
  std::vector<double> flow;
  Vector potentials;
};

namespace detail {

inline Vector solve_on(const IpmState& st, std::span<const double> f, const Vector& b, RoundLedger& ledger,
                       const MaxFlowOptions& opt) {
  const auto g = st.conductances(f);
  try {
    return solve_distributed(g, b, opt.solver_epsilon, ledger).y;
  } catch (const NoConvergence& e) {
    throw SolverFailure(e.what());
  }
}

inline std::vector<double> potential_flow(const IpmState& st, std::span<const double> f, const Vector& phi) {
  std::vector<double> out(st.edges.size());
  for (EdgeId e = 0; e < st.edges.size(); ++e)
    out[e] = (phi[st.edges[e].b] - phi[st.edges[e].a]) / st.resistance(e, f[e]);
  return out;
}

}  // namespace detail

// Electrical flow of value F from s to t under resistances taken at the current flow.
inline Electrical electrical_flow(const IpmState& st, double F, RoundLedger& ledger, const MaxFlowOptions& opt = {}) {
  Vector b = Vector::Zero(static_cast<Eigen::Index>(st.n));
  b[st.s] = -F;
  b[st.t] = F;
  Electrical el;
  el.potentials = detail::solve_on(st, st.flow, b, ledger, opt);
  el.flow = detail::potential_flow(st, st.flow, el.potentials);
  return el;
}

struct AugmentationResult {
  Electrical electrical;
  std::vector<double> flow;  // f + delta * electrical
  std::vector<double> y;     // y + delta * potentials
};

inline AugmentationResult step_from(const IpmState& st, Electrical el, double delta) {
  AugmentationResult r;
  r.flow.resize(st.edges.size());
  r.y.resize(st.n);
  for (EdgeId e = 0; e < st.edges.size(); ++e) r.flow[e] = st.flow[e] + delta * el.flow[e];
  for (NodeId v = 0; v < st.n; ++v) r.y[v] = st.y[v] + delta * el.potentials[v];
  r.electrical = std::move(el);
  if (!st.interior(r.flow)) throw InteriorViolated("augmentation step leaves the interior");
  return r;
}

inline AugmentationResult augmentation(const IpmState& st, double F, double delta, RoundLedger& ledger,
                                       const MaxFlowOptions& opt = {}) {
  return step_from(st, electrical_flow(st, F, ledger, opt), delta);
}

// rho_e = electrical flow over the smaller residual capacity
inline std::vector<double> congestion(const IpmState& st, std::span<const double> electrical) {
  std::vector<double> rho(st.edges.size());
  for (EdgeId e = 0; e < st.edges.size(); ++e) rho[e] = electrical[e] / st.slack(e, st.flow[e]);
  return rho;
}

inline double norm_p(std::span<const double> x, double p) {
  double s = 0.0;
  for (double v : x) s += std::pow(std::abs(v), p);
  return std::pow(s, 1.0 / p);
}

struct FixingResult {
  std::vector<double> flow;
  std::vector<double> y;
};

// One Newton correction towards the centre, then an electrical correction that
// cancels the residue the first one introduced.
inline FixingResult fixing(const IpmState& st, std::span<const double> f_hat, std::span<const double> y_hat,
                           RoundLedger& ledger, const MaxFlowOptions& opt = {}) {
  const std::size_t m = st.edges.size();
  std::vector<double> f1(m), theta(m);
  for (EdgeId e = 0; e < m; ++e) {
    const auto& ed = st.edges[e];
    theta[e] = ((y_hat[ed.b] - y_hat[ed.a]) - st.barrier_gradient(e, f_hat[e])) / st.resistance(e, f_hat[e]);
    f1[e] = f_hat[e] + theta[e];
  }
  if (!st.interior(f1)) throw InteriorViolated("centering correction leaves the interior");
  const auto excess = st.residue_of(theta);
  Vector b(static_cast<Eigen::Index>(st.n));
  for (NodeId v = 0; v < st.n; ++v) b[v] = -excess[v];
  FixingResult out;
  out.flow = f1;
  out.y.assign(y_hat.begin(), y_hat.end());
  if (b.lpNorm<Eigen::Infinity>() > 0.0) {
    const Vector phi = detail::solve_on(st, f1, b, ledger, opt);
    const auto corr = detail::potential_flow(st, f1, phi);
    for (EdgeId e = 0; e < m; ++e) out.flow[e] += corr[e];
    for (NodeId v = 0; v < st.n; ++v) out.y[v] += phi[v];
  }
  if (!st.interior(out.flow)) throw InteriorViolated("residue correction leaves the interior");
  return out;
}

struct BoostReport {
  std::vector<std::size_t> path_lengths;  // per boosted edge
  std::size_t flipped = 0;
  std::size_t skipped = 0;
  std::size_t preconditioning = 0;
};

inline std::size_t boost_path_length(double cap_scale, double slack) {
  return 2 + static_cast<std::size_t>(std::ceil(2.0 * cap_scale / slack));
}

// Replace every selected edge by a path whose extra edges have unbounded
// forward room, keeping flow and the duals' barrier relation on the path.
inline BoostReport boosting(LiftedNetwork& ln, std::span<const EdgeId> selected, std::int64_t max_cap,
                            const MaxFlowOptions& opt = {}) {
  auto& st = ln.state;
  BoostReport rep;
  const double cap_scale = static_cast<double>(std::max<std::int64_t>(max_cap, 1));
  std::vector<std::int64_t> arc_of(st.edges.size(), -1);
  for (EdgeId i = 0; i < ln.arc_edge.size(); ++i)
    if (ln.arc_edge[i] != kNoEdge) arc_of[ln.arc_edge[i]] = i;
  for (EdgeId e : selected) {
    double f = st.flow[e];
    double gap = st.barrier_gradient(e, f);
    const std::size_t beta = boost_path_length(cap_scale, st.slack(e, f));
    if (gap == 0.0 || !std::isfinite(gap) || beta > opt.max_path_length) {
      ++rep.skipped;
      continue;
    }
    if (gap < 0.0) {
      // walk the path the other way so the extra edges get positive backward room
      auto& ed = st.edges[e];
      std::swap(ed.a, ed.b);
      std::swap(ed.cap_fwd, ed.cap_back);
      f = -f;
      st.flow[e] = f;
      gap = -gap;
      if (arc_of[e] >= 0) ln.arc_sign[arc_of[e]] *= -1;
      ++rep.flipped;
    }
    if (e < ln.preconditioning) ++rep.preconditioning;
    const LiftedEdge orig = st.edges[e];
    const NodeId first_new = static_cast<NodeId>(st.n);
    st.n += beta - 1;
    auto vertex = [&](std::size_t i) { return i == 0 ? orig.a : (i == beta ? orig.b : first_new + static_cast<NodeId>(i - 1)); };
    st.edges[e] = {vertex(0), vertex(1), orig.cap_fwd, orig.cap_back};
    st.edges.push_back({vertex(1), vertex(2), orig.cap_fwd, orig.cap_back});
    st.flow.push_back(f);
    const double back_room = static_cast<double>(beta - 2) / gap - f;
    for (std::size_t i = 3; i <= beta; ++i) {
      st.edges.push_back({vertex(i - 1), vertex(i), kUnbounded, back_room});
      st.flow.push_back(f);
    }
    st.y.resize(st.n);
    const double yv = st.y[orig.b];
    st.y[vertex(1)] = yv;
    st.y[vertex(2)] = yv + gap;
    for (std::size_t i = 3; i < beta; ++i) st.y[vertex(i)] = st.y[vertex(i - 1)] - gap / static_cast<double>(beta - 2);
    arc_of.resize(st.edges.size(), -1);
    rep.path_lengths.push_back(beta);
  }
  return rep;
}

struct MaxFlowStats {
  std::size_t lifted_vertices = 0;
  std::size_t lifted_edges = 0;
  double eta = 0.0;
  double delta_hat = 0.0;
  std::size_t loop_bound = 0;
  std::size_t iterations = 0;
  std::size_t steps = 0;
  std::size_t boosts = 0;
  std::size_t boosted_edges = 0;
  std::size_t boost_flips = 0;
  std::size_t boost_skipped = 0;
  std::size_t boosted_preconditioning = 0;
  std::size_t boost_without_reduction = 0;
  std::size_t forced_steps = 0;
  std::size_t delta_halvings = 0;
  std::size_t cap_binding = 0;
  bool interior_held = true;
  double progress = 0.0;  // fraction of F routed by the interior point flow
  double min_slack = kUnbounded;
  std::int64_t warm_start_value = 0;
  std::size_t augmenting_paths = 0;
  std::size_t probes = 0;
};

struct MaxFlowResult {
  std::vector<std::int64_t> flow;
  std::int64_t value = 0;
  MaxFlowStats stats;
};

struct IpmSchedule {
  double eta = 0.0;
  double delta_hat = 0.0;
  double threshold = 0.0;
  std::size_t loop_bound = 0;
  std::size_t boost_count = 0;
};

inline IpmSchedule ipm_schedule(std::size_t m, std::int64_t max_cap, const MaxFlowOptions& opt = {}) {
  IpmSchedule s;
  const double u = static_cast<double>(std::max<std::int64_t>(max_cap, 1));
  const double md = static_cast<double>(std::max<std::size_t>(m, 1));
  s.eta = opt.eta_floor;
  if (m >= 2) {
    const double lm = std::log(md);
    const double eta = 1.0 / 14 - std::log(u) / (7.0 * lm) - opt.eta_log_constant * std::log(std::log2(md * u)) / lm;
    s.eta = std::max(eta, opt.eta_floor);
  }
  const double root = std::pow(md, 0.5 - s.eta);
  s.delta_hat = 1.0 / root;
  s.threshold = root / (33.0 * (1.0 - opt.alpha_step));
  s.loop_bound = static_cast<std::size_t>(std::ceil(opt.loop_constant * root * std::max(1.0, std::log2(u))));
  s.boost_count = static_cast<std::size_t>(std::ceil(std::pow(md, 4.0 * s.eta)));
  return s;
}

namespace detail {

inline double largest_power_of_two_at_most(double x) {
  int exp = 0;
  std::frexp(x, &exp);
  return std::ldexp(1.0, exp - 1);
}

// Reduce flow on the larger side of every unbalanced inner vertex until
// conservation holds; flows only decrease, so this terminates.
inline void trim_to_conservation(const FlowNetwork& g, std::vector<std::int64_t>& units, NodeId s, NodeId t) {
  const std::size_t n = g.num_vertices();
  std::vector<std::vector<EdgeId>> in(n), out(n);
  for (EdgeId e = 0; e < g.num_arcs(); ++e) {
    out[g.arc(e).from].push_back(e);
    in[g.arc(e).to].push_back(e);
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (NodeId v = 0; v < n; ++v) {
      if (v == s || v == t) continue;
      std::int64_t excess = 0;
      for (auto e : in[v]) excess += units[e];
      for (auto e : out[v]) excess -= units[e];
      if (excess == 0) continue;
      changed = true;
      auto& side = excess > 0 ? in[v] : out[v];
      std::int64_t left = excess > 0 ? excess : -excess;
      for (auto e : side) {
        const std::int64_t cut = std::min(left, units[e]);
        units[e] -= cut;
        left -= cut;
        if (left == 0) break;
      }
    }
  }
}

}  // namespace detail

inline MaxFlowResult max_flow(const FlowNetwork& g, NodeId s, NodeId t, std::int64_t target, RoundLedger& ledger,
                              const MaxFlowOptions& opt = {}) {
  if (target < 0) throw std::invalid_argument("target flow must be nonnegative");
  if (s >= g.num_vertices() || t >= g.num_vertices()) throw std::out_of_range("terminal outside the vertex range");
  if (s == t) throw std::invalid_argument("source equals sink");
  MaxFlowResult res;
  res.flow.assign(g.num_arcs(), 0);
  if (target == 0) return res;
  std::int64_t out_cap = 0;
  for (const auto& a : g.arcs())
    if (a.from == s) out_cap += a.capacity;
  if (target > out_cap) throw Infeasible("target exceeds the capacity leaving the source");

  const std::int64_t max_cap = std::max<std::int64_t>(g.max_capacity(), 1);
  const double F = static_cast<double>(target);
  auto ln = precondition_and_lift(g, s, t, max_cap);
  auto& st = ln.state;
  auto& stats = res.stats;
  const auto sched = ipm_schedule(ln.positive_arcs, max_cap, opt);
  stats.eta = sched.eta;
  stats.delta_hat = sched.delta_hat;
  stats.loop_bound = sched.loop_bound;
  const double floor = opt.interior_floor * static_cast<double>(max_cap);
  CliqueNetwork<> net(std::max<std::size_t>(g.num_vertices(), 1), ledger);

  auto track_slack = [&] {
    for (EdgeId e = 0; e < st.edges.size(); ++e) stats.min_slack = std::min(stats.min_slack, st.slack(e, st.flow[e]));
  };

  // a zero-length first step seeds the congestion vector
  auto el = electrical_flow(st, F, ledger, opt);
  auto rho = congestion(st, el.flow);
  {
    auto fx = fixing(st, st.flow, st.y, ledger, opt);
    st.flow = std::move(fx.flow);
    st.y = std::move(fx.y);
  }

  bool el_fresh = true;  // el was computed at the current flow
  double progress = 0.0;
  for (std::size_t it = 0; it < sched.loop_bound && progress < 1.0 - 1e-12; ++it) {
    ++stats.iterations;
    {
      // the cube norm is an all-to-all sum
      PhaseScope scope(net, "maxflow:norms");
      net.ledger().charge(net.phase(), 2);
    }
    double norm3 = norm_p(rho, 3.0);
    if (norm3 > sched.threshold) {
      std::vector<EdgeId> order(st.edges.size());
      std::iota(order.begin(), order.end(), EdgeId{0});
      const std::size_t k = std::min(sched.boost_count, order.size());
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                        [&](EdgeId x, EdgeId y) {
                          const double ax = std::abs(rho[x]), ay = std::abs(rho[y]);
                          return ax != ay ? ax > ay : x < y;
                        });
      order.resize(k);
      std::ranges::sort(order);
      {
        PhaseScope scope(net, "maxflow:boost");
        net.ledger().charge(net.phase(), 1);
      }
      const auto rep = boosting(ln, order, max_cap, opt);
      ++stats.boosts;
      stats.boosted_edges += rep.path_lengths.size();
      stats.boost_flips += rep.flipped;
      stats.boost_skipped += rep.skipped;
      stats.boosted_preconditioning += rep.preconditioning;
      if (rep.path_lengths.empty()) {
        ++stats.forced_steps;
      } else {
        el = electrical_flow(st, F, ledger, opt);
        el_fresh = true;
        rho = congestion(st, el.flow);
        const double boosted = norm_p(rho, 3.0);
        if (boosted < norm3) continue;
        // no progress from boosting: flag it and step anyway so the loop cannot stall
        ++stats.boost_without_reduction;
        ++stats.forced_steps;
        norm3 = boosted;
      }
    }

    if (!el_fresh) el = electrical_flow(st, F, ledger, opt);
    el_fresh = false;
    double delta = norm3 > 0.0 ? 1.0 / (33.0 * (1.0 - opt.alpha_step) * norm3) : 1.0;
    delta = std::min(delta, 1.0 - progress);
    double cap = kUnbounded;
    for (EdgeId e = 0; e < st.edges.size(); ++e) {
      const double x = el.flow[e];
      if (x > 0.0) cap = std::min(cap, (st.room_fwd(e, st.flow[e]) - floor) / x);
      if (x < 0.0) cap = std::min(cap, (st.room_back(e, st.flow[e]) - floor) / -x);
    }
    if (delta > cap) {
      delta = std::max(cap, 0.0);
      ++stats.cap_binding;
    }
    bool accepted = false;
    for (std::size_t h = 0; h <= opt.max_halvings && delta > 0.0; ++h, delta /= 2) {
      try {
        auto aug = step_from(st, el, delta);
        auto next_rho = congestion(st, aug.electrical.flow);
        auto fx = fixing(st, aug.flow, aug.y, ledger, opt);
        st.flow = std::move(fx.flow);
        st.y = std::move(fx.y);
        rho = std::move(next_rho);
        progress += delta;
        accepted = true;
        break;
      } catch (const InteriorViolated&) {
        ++stats.delta_halvings;
      }
    }
    if (!accepted) {
      stats.interior_held = false;
      break;
    }
    ++stats.steps;
    track_slack();
  }
  if (!st.interior(st.flow)) stats.interior_held = false;
  stats.progress = progress;
  stats.lifted_vertices = st.n;
  stats.lifted_edges = st.edges.size();

  // warm start on the original network
  const double unit = detail::largest_power_of_two_at_most(1.0 / (2.0 * static_cast<double>(std::max<std::size_t>(g.num_arcs(), 1))));
  std::vector<std::int64_t> units(g.num_arcs(), 0);
  for (EdgeId i = 0; i < g.num_arcs(); ++i) {
    if (ln.arc_edge[i] == kNoEdge) continue;
    const double x = std::clamp(ln.arc_sign[i] * st.flow[ln.arc_edge[i]], 0.0, static_cast<double>(g.arc(i).capacity));
    units[i] = static_cast<std::int64_t>(std::floor(x / unit));
  }
  detail::trim_to_conservation(g, units, s, t);
  if (flow_value<std::int64_t>(g, units, s) < 0) std::ranges::fill(units, 0);
  std::vector<double> frac(g.num_arcs());
  for (EdgeId i = 0; i < g.num_arcs(); ++i) frac[i] = static_cast<double>(units[i]) * unit;
  res.flow = flow_round({&g, frac, unit, Terminals{s, t}, false}, ledger).flow;
  std::int64_t value = flow_value<std::int64_t>(g, res.flow, s);
  stats.warm_start_value = value;

  while (value > target) {
    auto path = bfs_augmenting_path(g, res.flow, t, s, ledger, "maxflow:trim");
    if (!path) throw std::logic_error("positive flow without a path back to the source");
    const std::int64_t amount = std::min(bottleneck(g, res.flow, *path), value - target);
    push_along(res.flow, *path, amount);
    value -= amount;
  }
  while (value < target) {
    auto path = bfs_augmenting_path(g, res.flow, s, t, ledger, "maxflow:augment");
    if (!path) throw Infeasible("no augmenting path reaches the target value");
    const std::int64_t amount = std::min(bottleneck(g, res.flow, *path), target - value);
    push_along(res.flow, *path, amount);
    value += amount;
    ++stats.augmenting_paths;
  }
  res.value = value;
  return res;
}

// Largest feasible value by binary search over the target.
inline MaxFlowResult max_flow_value(const FlowNetwork& g, NodeId s, NodeId t, RoundLedger& ledger,
                                    const MaxFlowOptions& opt = {}) {
  if (s >= g.num_vertices() || t >= g.num_vertices()) throw std::out_of_range("terminal outside the vertex range");
  if (s == t) throw std::invalid_argument("source equals sink");
  std::int64_t out_cap = 0, in_cap = 0;
  for (const auto& a : g.arcs()) {
    if (a.from == s) out_cap += a.capacity;
    if (a.to == t) in_cap += a.capacity;
  }
  std::int64_t lo = 0, hi = std::min(out_cap, in_cap);
  MaxFlowResult best;
  best.flow.assign(g.num_arcs(), 0);
  std::size_t probes = 0;
  while (lo < hi) {
    const std::int64_t mid = lo + (hi - lo + 1) / 2;
    ++probes;
    try {
      best = max_flow(g, s, t, mid, ledger, opt);
      lo = mid;
    } catch (const Infeasible&) {
      hi = mid - 1;
    }
  }
  best.stats.probes = probes;
  return best;
}

}  // namespace cliqueflow
