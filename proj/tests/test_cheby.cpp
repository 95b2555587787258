#include <gtest/gtest.h>

#include <cliqueflow/chebyshev.hpp>
#include <cliqueflow/generators.hpp>
#include <cliqueflow/laplacian_solver.hpp>
#include <cliqueflow/spectral.hpp>

using namespace cliqueflow;

namespace {

double lg_norm(const Eigen::MatrixXd& L, const Vector& x) { return std::sqrt(std::max(0.0, x.dot(L * x))); }

WeightedGraph unit_edge() {
  WeightedGraph g(2);
  g.add_edge(0, 1);
  return g;
}

WeightedGraph triangle() {
  WeightedGraph g(3);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  g.add_edge(2, 0);
  return g;
}

// H with every weight of G multiplied by a factor in [1, kappa]: L_G <= L_H <= kappa L_G
WeightedGraph stretched(const WeightedGraph& g, double kappa, gen::Rng& rng) {
  std::uniform_real_distribution<double> f(1.0, kappa);
  WeightedGraph h(g.num_vertices());
  for (const auto& e : g.edges()) h.add_edge(e.u, e.v, e.w * f(rng));
  return h;
}

SpectralSparsifier exact(const WeightedGraph& g) { return {g, 1.0, {}}; }

}  // namespace

TEST(PreconCheby, UnitEdgePerfectPreconditioner) {
  const auto L = laplacian(unit_edge());
  Vector b(2);
  b << 1, -1;
  const LaplacianFactor f(unit_edge());
  auto [x, rep] = precon_cheby([&](const Vector& v) { return Vector(L * v); }, [&](const Vector& r) { return f.solve(r); },
                               b, ChebyConfig{1.0, 1e-10});
  EXPECT_NEAR(x[0], 0.5, 1e-12);
  EXPECT_NEAR(x[1], -0.5, 1e-12);
  EXPECT_LE(rep.iterations, rep.max_iters);
}

TEST(PreconCheby, ZeroRightHandSide) {
  auto [x, rep] = precon_cheby([](const Vector& v) { return v; }, [](const Vector& r) { return r; }, Vector::Zero(3),
                               ChebyConfig{4.0, 1e-6});
  EXPECT_EQ(x, Vector::Zero(3));
  EXPECT_LE(rep.iterations, 1u);
}

TEST(PreconCheby, TriangleWithDoubledPreconditioner) {
  const auto L = laplacian(triangle());
  const LaplacianFactor f(triangle());
  Vector b(3);
  b << 2, -1, -1;
  const double eps = 1e-8;
  // B = 2A, so A <= B <= 2A
  auto [x, rep] = precon_cheby([&](const Vector& v) { return Vector(L * v); },
                               [&](const Vector& r) -> Vector { return f.solve(r) / 2.0; }, b, ChebyConfig{2.0, eps});
  Vector want(3);
  want << 2.0 / 3, -1.0 / 3, -1.0 / 3;
  EXPECT_LE(lg_norm(L, x - want), eps * lg_norm(L, want));
}

TEST(PreconCheby, RejectsBadConfig) {
  auto id = [](const Vector& v) { return v; };
  EXPECT_THROW(precon_cheby(id, id, Vector::Ones(2), ChebyConfig{0.5, 1e-6}), std::invalid_argument);
  EXPECT_THROW(precon_cheby(id, id, Vector::Ones(2), ChebyConfig{2.0, 0.7}), std::invalid_argument);
}

TEST(PreconCheby, ViolatedSandwichIsDetected) {
  // B = A / 10 is not above A
  auto a = [](const Vector& v) { return Vector(10.0 * v); };
  auto b_inv = [](const Vector& r) { return Vector(r); };
  EXPECT_THROW(precon_cheby(a, b_inv, Vector::Ones(4), ChebyConfig{4.0, 1e-8}), NoConvergence);
}

TEST(PreconCheby, IterationLawOverGrid) {
  gen::Rng rng(3);
  auto g = gen::connected_graph(40, 80, 10, rng);
  const auto L = laplacian(g);
  for (double kappa : {1.0, 2.0, 4.0, 16.0, 64.0}) {
    const auto h = kappa == 1.0 ? g : stretched(g, kappa, rng);
    const LaplacianFactor f(h);
    for (double eps : {1e-2, 1e-6}) {
      Vector b = Vector::Random(40);
      b.array() -= b.mean();
      auto [x, rep] = precon_cheby([&](const Vector& v) { return Vector(L * v); },
                                   [&](const Vector& r) { return f.solve(r); }, b, ChebyConfig{kappa, eps, 1.0});
      const Vector want = pseudo_solve_oracle(L, b).x;
      EXPECT_LE(static_cast<double>(rep.iterations), std::sqrt(kappa) * std::log(2.0 / eps)) << kappa << " " << eps;
      EXPECT_LE(lg_norm(L, x - want), eps * lg_norm(L, want)) << kappa << " " << eps;
    }
  }
}

// Z is linear in b; on small graphs the whole operator is checked against L^+.
TEST(PreconCheby, OperatorSandwich) {
  gen::Rng rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    const std::size_t n = 6 + trial;
    auto g = gen::connected_graph(n, n, 5, rng);
    const double kappa = 4.0, eps = 1e-3;
    const auto h = stretched(g, kappa, rng);
    const auto L = laplacian(g);
    const LaplacianFactor f(h);
    const auto k = static_cast<Eigen::Index>(n);
    // basis of range(L): e_i - e_{n-1}
    Eigen::MatrixXd Z(k, k - 1), P(k, k - 1);
    for (Eigen::Index i = 0; i + 1 < k; ++i) {
      Vector b = Vector::Zero(k);
      b[i] = 1.0;
      b[k - 1] = -1.0;
      P.col(i) = pseudo_solve_oracle(L, b).x;
      Z.col(i) = precon_cheby([&](const Vector& v) { return Vector(L * v); }, [&](const Vector& r) { return f.solve(r); },
                              b, ChebyConfig{kappa, eps})
                     .first;
    }
    Eigen::MatrixXd B(k - 1, k);
    B.setZero();
    for (Eigen::Index i = 0; i + 1 < k; ++i) {
      B(i, i) = 1.0;
      B(i, k - 1) = -1.0;
    }
    // quadratic forms restricted to range(L): B Z and B P are symmetric positive definite
    Eigen::MatrixXd Zs = B * Z, Ps = B * P;
    Zs = 0.5 * (Zs + Zs.transpose()).eval();
    Ps = 0.5 * (Ps + Ps.transpose()).eval();
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Zs, Ps);
    EXPECT_GE(es.eigenvalues().minCoeff(), 1.0 - eps - 1e-9);
    EXPECT_LE(es.eigenvalues().maxCoeff(), 1.0 + eps + 1e-9);
  }
}

TEST(LaplacianSolve, PerfectPreconditionerUnitEdge) {
  RoundLedger ledger;
  Vector b(2);
  b << 1, -1;
  auto [y, rep] = laplacian_solve(unit_edge(), exact(unit_edge()), b, 1e-8, ledger);
  EXPECT_NEAR(y[0], 0.5, 1e-8);
  EXPECT_NEAR(y[1], -0.5, 1e-8);
  EXPECT_EQ(ledger.phase("solve:matvec"), rep.iterations);
}

TEST(LaplacianSolve, ZeroRightHandSide) {
  RoundLedger ledger;
  auto [y, rep] = laplacian_solve(triangle(), exact(triangle()), Vector::Zero(3), 1e-6, ledger);
  EXPECT_EQ(y, Vector::Zero(3));
}

TEST(LaplacianSolve, WithSparsifierOnRandomGraph) {
  gen::Rng rng(50);
  auto g = gen::connected_graph(50, 100, 10, rng);
  RoundLedger ledger;
  const auto h = spectral_sparsify(g, 1.0, ledger);
  Vector b = Vector::Random(50);
  b.array() -= b.mean();
  const double eps = 1e-6;
  auto [y, rep] = laplacian_solve(g, h, b, eps, ledger);
  const auto L = laplacian(g);
  const Vector want = pseudo_solve_oracle(L, b).x;
  EXPECT_LE(lg_norm(L, y - want), eps * lg_norm(L, want));
  EXPECT_LE(rep.iterations, rep.max_iters);
  std::uint64_t sum = 0;
  for (const auto& [phase, r] : ledger.per_phase()) sum += r;
  EXPECT_EQ(sum, ledger.rounds_charged());
}

TEST(SolveDistributed, UnitEdge) {
  RoundLedger ledger;
  Vector b(2);
  b << 1, -1;
  const auto r = solve_distributed(unit_edge(), b, 1e-6, ledger);
  EXPECT_NEAR(r.y[0], 0.5, 1e-6);
  EXPECT_NEAR(r.y[1], -0.5, 1e-6);
  EXPECT_EQ(r.report.rounds, ledger.rounds_charged());
}

TEST(SolveDistributed, DisjointComponentsSolvedSeparately) {
  WeightedGraph g(4);
  g.add_edge(0, 1);
  g.add_edge(2, 3);
  Vector b(4);
  b << 0, 0, 1, -1;
  RoundLedger ledger;
  const auto r = solve_distributed(g, b, 1e-6, ledger);
  const Vector want = pseudo_solve_oracle(laplacian(g), b).x;
  EXPECT_LE((r.y - want).norm(), 1e-6);
  EXPECT_NEAR(r.y[0], 0.0, 1e-9);
}

TEST(SolveDistributed, KernelDirectionIsProjected) {
  RoundLedger ledger;
  const auto r = solve_distributed(triangle(), Vector::Ones(3), 1e-6, ledger);
  EXPECT_NEAR(r.report.projection_residual, std::sqrt(3.0), 1e-12);
  EXPECT_LE(r.y.norm(), 1e-12);
}

TEST(SolveDistributed, StrictModeRejectsKernelComponent) {
  RoundLedger ledger;
  DistributedSolveOptions opt;
  opt.solve.strict_range = true;
  EXPECT_THROW(solve_distributed(triangle(), Vector::Ones(3), 1e-6, ledger, opt), DisconnectedWithInfeasibleB);
}

TEST(SolveDistributed, RealWeightsAreRounded) {
  gen::Rng rng(8);
  WeightedGraph g(30);
  auto base = gen::connected_graph(30, 50, 1, rng);
  std::uniform_real_distribution<double> w(0.3, 7.0);
  for (const auto& e : base.edges()) g.add_edge(e.u, e.v, w(rng));
  Vector b = Vector::Random(30);
  b.array() -= b.mean();
  RoundLedger ledger;
  const double eps = 1e-6;
  const auto r = solve_distributed(g, b, eps, ledger);
  const auto L = laplacian(g);
  const Vector want = pseudo_solve_oracle(L, b).x;
  EXPECT_LE(lg_norm(L, r.y - want), eps * lg_norm(L, want));
  EXPECT_GE(r.rounding_factor, 1.0);
  EXPECT_LE(r.rounding_factor, 1.0 + 2 * eps);
}
