#include <gtest/gtest.h>

#include <cliqueflow/flow_round.hpp>
#include <cliqueflow/generators.hpp>

using namespace cliqueflow;

namespace {

// Convex combination of integral flows with weights that are multiples of delta.
std::vector<double> mix(const std::vector<std::vector<std::int64_t>>& flows, const std::vector<std::int64_t>& weight_units,
                        double delta) {
  std::vector<double> f(flows[0].size(), 0.0);
  for (std::size_t i = 0; i < flows.size(); ++i)
    for (std::size_t e = 0; e < f.size(); ++e) f[e] += static_cast<double>(weight_units[i]) * delta * static_cast<double>(flows[i][e]);
  return f;
}

// random split of `total` units into k nonnegative parts
std::vector<std::int64_t> split(std::int64_t total, std::size_t k, gen::Rng& rng) {
  std::vector<std::int64_t> cuts{0, total};
  for (std::size_t i = 1; i < k; ++i) cuts.push_back(gen::uniform_int(rng, 0, total));
  std::ranges::sort(cuts);
  std::vector<std::int64_t> parts;
  for (std::size_t i = 1; i < cuts.size(); ++i) parts.push_back(cuts[i] - cuts[i - 1]);
  return parts;
}

struct Case {
  gen::StInstance inst;
  std::vector<double> flow;
  double delta;
};

Case random_case(gen::Rng& rng, bool same_value) {
  const auto n = static_cast<std::size_t>(gen::uniform_int(rng, 3, 16));
  const auto m = static_cast<std::size_t>(gen::uniform_int(rng, static_cast<std::int64_t>(n), 4 * static_cast<std::int64_t>(n)));
  Case c{gen::random_dag(n, m, 6, rng), {}, 0.0};
  const auto phases = static_cast<std::size_t>(gen::uniform_int(rng, 1, 8));
  c.delta = std::ldexp(1.0, -static_cast<int>(phases));
  const auto k = static_cast<std::size_t>(gen::uniform_int(rng, 2, 4));
  std::vector<std::vector<std::int64_t>> flows;
  const auto units = static_cast<std::size_t>(gen::uniform_int(rng, 0, 4));
  for (std::size_t i = 0; i < k; ++i) flows.push_back(gen::random_path_flow(c.inst, same_value ? units : units + i, rng));
  c.flow = mix(flows, split(std::int64_t{1} << phases, k, rng), c.delta);
  return c;
}

double value_of(const gen::StInstance& inst, std::span<const double> f) { return flow_value<double>(inst.net, f, inst.s); }

}  // namespace

TEST(RoundingPhases, PowersOfTwo) {
  EXPECT_EQ(rounding_phases(1.0), 0u);
  EXPECT_EQ(rounding_phases(0.5), 1u);
  EXPECT_EQ(rounding_phases(1.0 / 256), 8u);
  EXPECT_THROW(rounding_phases(0.3), std::invalid_argument);
  EXPECT_THROW(rounding_phases(2.0), std::invalid_argument);
  EXPECT_THROW(rounding_phases(0.0), std::invalid_argument);
}

TEST(FlowRound, IntegralInputIsUnchanged) {
  gen::Rng rng(1);
  auto inst = gen::random_dag(10, 25, 5, rng);
  const auto f = gen::random_path_flow(inst, 4, rng);
  std::vector<double> fd(f.begin(), f.end());
  for (double delta : {1.0, 0.5, 1.0 / 64}) {
    RoundLedger ledger;
    const auto r = flow_round({&inst.net, fd, delta, Terminals{inst.s, inst.t}, true}, ledger);
    EXPECT_EQ(r.flow, f);
    EXPECT_EQ(r.orient_calls, rounding_phases(delta));
    EXPECT_FALSE(r.closure_used);
  }
}

TEST(FlowRound, HalfUnitPathRoundsUp) {
  FlowNetwork g(3);
  g.add_arc(0, 1, 1);
  g.add_arc(1, 2, 1);
  const std::vector<double> f{0.5, 0.5};
  RoundLedger ledger;
  const auto r = flow_round({&g, f, 0.5, Terminals{0, 2}, false}, ledger);
  // the only other orientation of the cycle through the closure gives value 0 < 1/2
  EXPECT_EQ(r.flow, (std::vector<std::int64_t>{1, 1}));
  EXPECT_TRUE(r.closure_used);
  EXPECT_EQ(r.orient_calls, 1u);
  EXPECT_GT(ledger.rounds_charged(), 0u);
}

TEST(FlowRound, ParallelPathsPickTheCheaperOne) {
  FlowNetwork g(4);
  g.add_arc(0, 1, 1, 1);
  g.add_arc(1, 3, 1, 1);
  g.add_arc(0, 2, 1, 2);
  g.add_arc(2, 3, 1, 2);
  const std::vector<double> f{0.5, 0.5, 0.5, 0.5};
  RoundLedger ledger;
  const auto r = flow_round({&g, f, 0.5, Terminals{0, 3}, true}, ledger);
  // integral roundings of value 1: path A (cost 2) or path B (cost 4)
  EXPECT_EQ(r.flow, (std::vector<std::int64_t>{1, 1, 0, 0}));
  EXPECT_EQ(flow_cost<std::int64_t>(g, r.flow), 2.0);
  EXPECT_FALSE(r.closure_used);
}

TEST(FlowRound, Errors) {
  FlowNetwork g(2);
  g.add_arc(0, 1, 1);
  RoundLedger ledger;
  const std::vector<double> third{1.0 / 3};
  EXPECT_THROW(flow_round({&g, third, 0.5, Terminals{0, 1}, false}, ledger), NotMultipleOfDelta);
  const std::vector<double> half{0.5};
  // without terminals a lone half unit is not a circulation
  EXPECT_THROW(flow_round({&g, half, 0.5, std::nullopt, false}, ledger), OddDegreeInternal);
  EXPECT_THROW(flow_round({&g, half, 0.75, Terminals{0, 1}, false}, ledger), std::invalid_argument);
  const std::vector<double> wrong_size{0.5, 0.5};
  EXPECT_THROW(flow_round({&g, wrong_size, 0.5, Terminals{0, 1}, false}, ledger), DimensionMismatch);
}

TEST(FlowRound, RandomFractionalFlows) {
  gen::Rng rng(2);
  for (int trial = 0; trial < 150; ++trial) {
    const bool same_value = trial % 2 == 0;
    const auto c = random_case(rng, same_value);
    const auto& g = c.inst.net;
    RoundLedger ledger;
    const auto r = flow_round({&g, c.flow, c.delta, Terminals{c.inst.s, c.inst.t}, true}, ledger);
    ASSERT_EQ(r.flow.size(), g.num_arcs());
    for (EdgeId e = 0; e < g.num_arcs(); ++e) {
      EXPECT_GE(static_cast<double>(r.flow[e]), std::floor(c.flow[e]));
      EXPECT_LE(static_cast<double>(r.flow[e]), std::ceil(c.flow[e]));
    }
    const double in_value = value_of(c.inst, c.flow);
    const auto rounded = residue<std::int64_t>(g, r.flow);
    for (NodeId v = 0; v < g.num_vertices(); ++v) {
      if (v != c.inst.s && v != c.inst.t) {
        EXPECT_EQ(rounded[v], 0.0);
      }
    }
    EXPECT_GE(static_cast<double>(flow_value<std::int64_t>(g, r.flow, c.inst.s)), in_value - 1e-9);
    if (in_value == std::floor(in_value)) {
      EXPECT_LE(flow_cost<std::int64_t>(g, r.flow), flow_cost<double>(g, c.flow) + 1e-9);
    }
    EXPECT_EQ(r.orient_calls, rounding_phases(c.delta));
  }
}

TEST(FlowRound, CirculationKeepsResidue) {
  gen::Rng rng(3);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    auto c = random_case(rng, true);
    const auto& g = c.inst.net;
    // demand form: the residue at s and t is integral only when the value is
    const double value = value_of(c.inst, c.flow);
    if (value != std::floor(value)) continue;
    ++checked;
    RoundLedger ledger;
    const auto r = flow_round({&g, c.flow, c.delta, std::nullopt, true}, ledger);
    const auto before = residue<double>(g, c.flow);
    const auto after = residue<std::int64_t>(g, r.flow);
    for (NodeId v = 0; v < g.num_vertices(); ++v) EXPECT_NEAR(after[v], before[v], 1e-9);
    EXPECT_LE(flow_cost<std::int64_t>(g, r.flow), flow_cost<double>(g, c.flow) + 1e-9);
  }
  EXPECT_GE(checked, 20);
}

TEST(FlowRound, Deterministic) {
  gen::Rng rng(4);
  const auto c = random_case(rng, false);
  RoundLedger a, b;
  const auto x = flow_round({&c.inst.net, c.flow, c.delta, Terminals{c.inst.s, c.inst.t}, true}, a);
  const auto y = flow_round({&c.inst.net, c.flow, c.delta, Terminals{c.inst.s, c.inst.t}, true}, b);
  EXPECT_EQ(x.flow, y.flow);
  EXPECT_EQ(a, b);
}
