#include <gtest/gtest.h>

#include <cliqueflow/flow_oracles.hpp>
#include <cliqueflow/generators.hpp>
#include <cliqueflow/maxflow.hpp>

using namespace cliqueflow;

namespace {

FlowNetwork single_arc(std::int64_t cap) {
  FlowNetwork g(2);
  g.add_arc(0, 1, cap);
  return g;
}

// s=0, a=1, b=2, t=3
FlowNetwork diamond(std::int64_t cap) {
  FlowNetwork g(4);
  g.add_arc(0, 1, cap);
  g.add_arc(1, 3, cap);
  g.add_arc(0, 2, cap);
  g.add_arc(2, 3, cap);
  return g;
}

void expect_feasible(const FlowNetwork& g, std::span<const std::int64_t> f, NodeId s, NodeId t) {
  ASSERT_EQ(f.size(), g.num_arcs());
  for (EdgeId e = 0; e < g.num_arcs(); ++e) {
    EXPECT_GE(f[e], 0);
    EXPECT_LE(f[e], g.arc(e).capacity);
  }
  const auto r = residue<std::int64_t>(g, f);
  for (NodeId v = 0; v < g.num_vertices(); ++v) {
    if (v != s && v != t) {
      EXPECT_EQ(r[v], 0.0) << "vertex " << v;
    }
  }
}

IpmState one_edge_state(double cap) {
  IpmState st;
  st.n = 2;
  st.s = 0;
  st.t = 1;
  st.edges.push_back({0, 1, cap, cap});
  st.flow = {0.0};
  st.y = {0.0, 0.0};
  return st;
}

}  // namespace

TEST(Lift, SingleArc) {
  const auto ln = precondition_and_lift(single_arc(1), 0, 1, 1);
  EXPECT_EQ(ln.state.edges.size(), 4u);
  EXPECT_EQ(ln.preconditioning, 1u);
  for (const auto& e : ln.state.edges) EXPECT_TRUE((e.a == 0 && e.b == 1) || (e.a == 1 && e.b == 0));
  EXPECT_EQ(ln.state.edges[0].cap_fwd, 2.0);
  EXPECT_EQ(ln.state.edges[0].a, 1u);
  EXPECT_EQ(ln.arc_edge[0], 1u);
}

TEST(Lift, TwoArcPath) {
  FlowNetwork g(3);
  g.add_arc(0, 1, 2);
  g.add_arc(1, 2, 1);
  const auto ln = precondition_and_lift(g, 0, 2, 2);
  EXPECT_EQ(ln.state.edges.size(), 8u);
  EXPECT_EQ(ln.preconditioning, 2u);
  EXPECT_EQ(ln.state.edges[0].cap_fwd, 4.0);
  EXPECT_EQ(ln.state.edges[2].cap_fwd, 2.0);
  EXPECT_EQ(ln.state.edges[5].cap_back, 1.0);
  EXPECT_EQ(ln.state.flow, std::vector<double>(8, 0.0));
  EXPECT_EQ(ln.state.y, std::vector<double>(3, 0.0));
}

TEST(Lift, LoopCopiesAreDropped) {
  FlowNetwork g(3);
  g.add_arc(1, 0, 1);  // into s: the (s, v) copy would be a loop
  g.add_arc(2, 1, 1);  // out of t: the (u, t) copy would be a loop
  const auto ln = precondition_and_lift(g, 0, 2, 1);
  EXPECT_EQ(ln.state.edges.size(), 2u + 2u + 2u);
  for (const auto& e : ln.state.edges) EXPECT_NE(e.a, e.b);
}

TEST(Lift, ZeroCapacityArcsAreSkipped) {
  FlowNetwork g(2);
  g.add_arc(0, 1, 0);
  g.add_arc(0, 1, 2);
  const auto ln = precondition_and_lift(g, 0, 1, 2);
  EXPECT_EQ(ln.state.edges.size(), 4u);
  EXPECT_EQ(ln.arc_edge[0], kNoEdge);
}

TEST(Augmentation, ZeroStepIsIdentity) {
  auto ln = precondition_and_lift(diamond(2), 0, 3, 2);
  RoundLedger ledger;
  const auto r = augmentation(ln.state, 1.0, 0.0, ledger);
  EXPECT_EQ(r.flow, ln.state.flow);
  EXPECT_EQ(r.y, ln.state.y);
}

TEST(Augmentation, UnitEdge) {
  const auto st = one_edge_state(2.0);
  EXPECT_DOUBLE_EQ(st.resistance(0, 0.0), 0.5);
  RoundLedger ledger;
  const auto r = augmentation(st, 1.0, 0.25, ledger);
  EXPECT_NEAR(r.electrical.flow[0], 1.0, 1e-8);
  EXPECT_NEAR(r.electrical.potentials[1] - r.electrical.potentials[0], 0.5, 1e-8);
  EXPECT_NEAR(r.flow[0], 0.25, 1e-8);
  EXPECT_GT(ledger.rounds_charged(), 0u);
}

TEST(Augmentation, TooLongStepLeavesInterior) {
  const auto st = one_edge_state(2.0);
  RoundLedger ledger;
  EXPECT_THROW(augmentation(st, 1.0, 2.0, ledger), InteriorViolated);
}

TEST(Augmentation, DiamondSplitsEvenly) {
  IpmState st;
  st.n = 4;
  st.s = 0;
  st.t = 3;
  st.edges = {{0, 1, 1, 1}, {1, 3, 1, 1}, {0, 2, 1, 1}, {2, 3, 1, 1}};
  st.flow.assign(4, 0.0);
  st.y.assign(4, 0.0);
  RoundLedger ledger;
  const auto el = electrical_flow(st, 1.0, ledger);
  for (double x : el.flow) EXPECT_NEAR(x, 0.5, 1e-8);
  const auto res = st.residue_of(el.flow);
  EXPECT_NEAR(res[0], -1.0, 1e-8);
  EXPECT_NEAR(res[3], 1.0, 1e-8);
}

TEST(Augmentation, ElectricalResidueOnLiftedGraphs) {
  gen::Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    auto inst = gen::random_dag(10, 25, 6, rng);
    auto ln = precondition_and_lift(inst.net, inst.s, inst.t, inst.net.max_capacity());
    RoundLedger ledger;
    const auto el = electrical_flow(ln.state, 3.0, ledger);
    const auto res = ln.state.residue_of(el.flow);
    for (NodeId v = 0; v < ln.state.n; ++v) {
      const double want = v == inst.s ? -3.0 : (v == inst.t ? 3.0 : 0.0);
      EXPECT_NEAR(res[v], want, 1e-6);
    }
  }
}

TEST(Fixing, CentredPointIsFixed) {
  auto st = one_edge_state(2.0);
  const std::vector<double> f{0.5};
  // y_b - y_a = 1/(2 - 0.5) - 1/(2 + 0.5)
  const std::vector<double> y{0.0, 1.0 / 1.5 - 1.0 / 2.5};
  RoundLedger ledger;
  const auto r = fixing(st, f, y, ledger);
  EXPECT_NEAR(r.flow[0], 0.5, 1e-12);
  EXPECT_NEAR(r.y[0], y[0], 1e-12);
  EXPECT_NEAR(r.y[1], y[1], 1e-12);
}

TEST(Fixing, PerturbedDualsKeepResidue) {
  IpmState st;
  st.n = 3;
  st.s = 0;
  st.t = 2;
  st.edges = {{0, 1, 2, 2}, {1, 2, 2, 2}, {0, 2, 1, 1}};
  st.flow.assign(3, 0.0);
  st.y.assign(3, 0.0);
  const std::vector<double> f{0.3, 0.3, 0.1};
  const std::vector<double> y{0.0, 0.05, 0.2};
  RoundLedger ledger;
  const auto r = fixing(st, f, y, ledger);
  const auto before = st.residue_of(f);
  const auto after = st.residue_of(r.flow);
  for (NodeId v = 0; v < 3; ++v) EXPECT_NEAR(after[v], before[v], 1e-8);
  EXPECT_TRUE(st.interior(r.flow));
}

TEST(Fixing, RandomStatesKeepResidue) {
  gen::Rng rng(22);
  for (int trial = 0; trial < 10; ++trial) {
    auto inst = gen::random_dag(8, 20, 5, rng);
    auto ln = precondition_and_lift(inst.net, inst.s, inst.t, inst.net.max_capacity());
    auto& st = ln.state;
    RoundLedger ledger;
    const auto aug = augmentation(st, 2.0, 0.05, ledger);
    std::vector<double> y = aug.y;
    for (auto& v : y) v += 0.01 * static_cast<double>(gen::uniform_int(rng, -3, 3));
    const auto r = fixing(st, aug.flow, y, ledger);
    const auto before = st.residue_of(aug.flow);
    const auto after = st.residue_of(r.flow);
    for (NodeId v = 0; v < st.n; ++v) EXPECT_NEAR(after[v], before[v], 1e-6);
  }
}

TEST(Boosting, ShortestPathWhenResidualIsTwiceU) {
  EXPECT_EQ(boost_path_length(1.0, 2.0), 3u);
  EXPECT_EQ(boost_path_length(4.0, 2.0), 6u);
}

TEST(Boosting, EmptySelectionLeavesGraph) {
  auto ln = precondition_and_lift(diamond(2), 0, 3, 2);
  const auto before = ln.state.edges.size();
  const auto rep = boosting(ln, {}, 2);
  EXPECT_EQ(ln.state.edges.size(), before);
  EXPECT_TRUE(rep.path_lengths.empty());
}

TEST(Boosting, PathAssignmentsAndTelescopingDuals) {
  LiftedNetwork ln;
  ln.state = one_edge_state(4.0);
  ln.state.flow = {1.0};
  ln.state.y = {0.0, 0.7};
  ln.arc_edge = {0};
  ln.arc_sign = {1};
  const double gap = 1.0 / 3.0 - 1.0 / 5.0;
  const std::vector<EdgeId> sel{0};
  const auto rep = boosting(ln, sel, 2);
  const auto& st = ln.state;
  // min residual 3, U = 2: beta = 2 + ceil(4/3) = 4
  ASSERT_EQ(rep.path_lengths, std::vector<std::size_t>{4});
  EXPECT_EQ(st.n, 5u);
  ASSERT_EQ(st.edges.size(), 4u);
  EXPECT_EQ(st.edges[0].a, 0u);
  EXPECT_EQ(st.edges[3].b, 1u);
  for (EdgeId e = 0; e + 1 < 4; ++e) EXPECT_EQ(st.edges[e].b, st.edges[e + 1].a);
  EXPECT_EQ(st.edges[1].cap_fwd, 4.0);
  EXPECT_TRUE(std::isinf(st.edges[2].cap_fwd));
  EXPECT_NEAR(st.edges[2].cap_back, 2.0 / gap - 1.0, 1e-12);
  for (double f : st.flow) EXPECT_EQ(f, 1.0);
  // duals along v1..v_beta, where v_beta is the old head
  const std::vector<NodeId> path{st.edges[0].b, st.edges[1].b, st.edges[2].b, st.edges[3].b};
  double increments = 0.0;
  for (std::size_t i = 1; i + 1 < path.size(); ++i) increments += st.y[path[i + 1]] - st.y[path[i]];
  EXPECT_NEAR(increments, -gap, 1e-12);
  EXPECT_NEAR(st.y[path[0]], 0.7, 1e-15);
  EXPECT_NEAR(st.y[path[1]], 0.7 + gap, 1e-15);
  // every path edge is centred: the dual difference equals the barrier gradient
  for (EdgeId e = 1; e < 4; ++e) {
    const auto& ed = st.edges[e];
    EXPECT_NEAR(st.y[ed.b] - st.y[ed.a], st.barrier_gradient(e, st.flow[e]), 1e-12) << e;
  }
}

TEST(Boosting, NegativeGapFlipsTheEdge) {
  LiftedNetwork ln;
  ln.state = one_edge_state(4.0);
  ln.state.flow = {-1.0};
  ln.arc_edge = {0};
  ln.arc_sign = {1};
  const std::vector<EdgeId> sel{0};
  const auto rep = boosting(ln, sel, 2);
  EXPECT_EQ(rep.flipped, 1u);
  EXPECT_EQ(ln.arc_sign[0], -1);
  EXPECT_EQ(ln.state.edges[0].a, 1u);
  EXPECT_EQ(ln.state.flow[0], 1.0);
}

TEST(Boosting, BalancedEdgeIsSkipped) {
  LiftedNetwork ln;
  ln.state = one_edge_state(4.0);
  const std::vector<EdgeId> sel{0};
  const auto rep = boosting(ln, sel, 2);
  EXPECT_EQ(rep.skipped, 1u);
  EXPECT_EQ(ln.state.edges.size(), 1u);
}

TEST(Schedule, FloorAndBounds) {
  const auto s = ipm_schedule(100, 8);
  EXPECT_DOUBLE_EQ(s.eta, 1.0 / 28);
  EXPECT_NEAR(s.delta_hat, std::pow(100.0, -(0.5 - 1.0 / 28)), 1e-12);
  EXPECT_NEAR(static_cast<double>(s.loop_bound), 300.0 * std::pow(100.0, 0.5 - 1.0 / 28), 1.0);
  EXPECT_EQ(s.boost_count, static_cast<std::size_t>(std::ceil(std::pow(100.0, 4.0 / 28))));
  MaxFlowOptions opt;
  opt.eta_log_constant = 0.0;
  // U = 1, no log term: 1/14
  EXPECT_DOUBLE_EQ(ipm_schedule(1000, 1, opt).eta, 1.0 / 14);
}

TEST(MaxFlow, SingleArcCapacityThree) {
  const auto g = single_arc(3);
  RoundLedger ledger;
  const auto r = max_flow(g, 0, 1, 3, ledger);
  EXPECT_EQ(r.value, 3);
  EXPECT_EQ(r.flow, std::vector<std::int64_t>{3});
  EXPECT_EQ(oracle::max_flow(g, 0, 1).value, 3);
  EXPECT_TRUE(r.stats.interior_held);
  EXPECT_LE(r.stats.iterations, r.stats.loop_bound);
}

TEST(MaxFlow, ZeroTargetIsImmediate) {
  RoundLedger ledger;
  const auto r = max_flow(diamond(3), 0, 3, 0, ledger);
  EXPECT_EQ(r.flow, std::vector<std::int64_t>(4, 0));
  EXPECT_EQ(ledger.rounds_charged(), 0u);
}

TEST(MaxFlow, InfeasibleTarget) {
  RoundLedger ledger;
  EXPECT_THROW(max_flow(diamond(1), 0, 3, 3, ledger), Infeasible);
  FlowNetwork g(4);
  g.add_arc(0, 1, 5);
  g.add_arc(1, 3, 1);
  g.add_arc(2, 3, 5);
  EXPECT_THROW(max_flow(g, 0, 3, 2, ledger), Infeasible);
  EXPECT_THROW(max_flow(g, 0, 0, 1, ledger), std::invalid_argument);
  EXPECT_THROW(max_flow(g, 0, 3, -1, ledger), std::invalid_argument);
}

TEST(MaxFlow, DiamondReachesTarget) {
  RoundLedger ledger;
  const auto r = max_flow(diamond(2), 0, 3, 4, ledger);
  EXPECT_EQ(r.value, 4);
  EXPECT_EQ(r.flow, std::vector<std::int64_t>(4, 2));
  EXPECT_GT(ledger.phase("maxflow:norms"), 0u);
}

TEST(MaxFlow, PartialTargetIsExact) {
  gen::Rng rng(31);
  auto inst = gen::random_dag(12, 40, 6, rng);
  const auto best = oracle::max_flow(inst.net, inst.s, inst.t).value;
  for (std::int64_t F = 0; F <= best; F += std::max<std::int64_t>(1, best / 4)) {
    RoundLedger ledger;
    const auto r = max_flow(inst.net, inst.s, inst.t, F, ledger);
    EXPECT_EQ(r.value, F);
    expect_feasible(inst.net, r.flow, inst.s, inst.t);
  }
}

TEST(MaxFlow, RandomDagsMatchOracle) {
  gen::Rng rng(32);
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = static_cast<std::size_t>(gen::uniform_int(rng, 3, 30));
    const auto m = static_cast<std::size_t>(gen::uniform_int(rng, static_cast<std::int64_t>(n), 3 * static_cast<std::int64_t>(n)));
    auto inst = gen::random_dag(n, m, 8, rng);
    const auto want = oracle::max_flow(inst.net, inst.s, inst.t).value;
    RoundLedger ledger;
    const auto r = max_flow(inst.net, inst.s, inst.t, want, ledger);
    EXPECT_EQ(r.value, want) << "trial " << trial;
    expect_feasible(inst.net, r.flow, inst.s, inst.t);
    EXPECT_TRUE(r.stats.interior_held) << "trial " << trial;
    EXPECT_LE(r.stats.iterations, r.stats.loop_bound);
  }
}

TEST(MaxFlow, Deterministic) {
  gen::Rng rng(34);
  auto inst = gen::random_dag(12, 30, 5, rng);
  const auto want = oracle::max_flow(inst.net, inst.s, inst.t).value;
  RoundLedger a, b;
  const auto x = max_flow(inst.net, inst.s, inst.t, want, a);
  const auto y = max_flow(inst.net, inst.s, inst.t, want, b);
  EXPECT_EQ(x.flow, y.flow);
  EXPECT_EQ(a, b);
}

TEST(MaxFlowValue, SingleArc) {
  RoundLedger ledger;
  EXPECT_EQ(max_flow_value(single_arc(3), 0, 1, ledger).value, 3);
}

TEST(MaxFlowValue, Disconnected) {
  FlowNetwork g(4);
  g.add_arc(0, 1, 2);
  g.add_arc(2, 3, 2);
  RoundLedger ledger;
  const auto r = max_flow_value(g, 0, 3, ledger);
  EXPECT_EQ(r.value, 0);
  EXPECT_EQ(r.flow, std::vector<std::int64_t>(2, 0));
}

TEST(MaxFlowValue, K4AdjacentTerminals) {
  FlowNetwork g(4);
  for (NodeId u = 0; u < 4; ++u)
    for (NodeId v = 0; v < 4; ++v)
      if (u != v) g.add_arc(u, v, 1);
  EXPECT_EQ(oracle::exhaustive_min_cut(g, 0, 1), 3);
  RoundLedger ledger;
  const auto r = max_flow_value(g, 0, 1, ledger);
  EXPECT_EQ(r.value, 3);
  expect_feasible(g, r.flow, 0, 1);
}

TEST(MaxFlowValue, MatchesExhaustiveCut) {
  gen::Rng rng(35);
  for (int trial = 0; trial < 10; ++trial) {
    auto inst = gen::random_dag(8, 16, 4, rng);
    RoundLedger ledger;
    const auto r = max_flow_value(inst.net, inst.s, inst.t, ledger);
    EXPECT_EQ(r.value, oracle::exhaustive_min_cut(inst.net, inst.s, inst.t));
    expect_feasible(inst.net, r.flow, inst.s, inst.t);
  }
}
