#include <gtest/gtest.h>

#include <cliqueflow/generators.hpp>
#include <cliqueflow/graph.hpp>
#include <cliqueflow/spectral.hpp>

using namespace cliqueflow;

namespace {

WeightedGraph triangle() {
  WeightedGraph g(3);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  g.add_edge(2, 0);
  return g;
}

}  // namespace

TEST(Laplacian, UnitEdge) {
  WeightedGraph g(2);
  g.add_edge(0, 1);
  Eigen::MatrixXd want(2, 2);
  want << 1, -1, -1, 1;
  EXPECT_EQ(laplacian(g), want);
}

TEST(Laplacian, Triangle) {
  Eigen::MatrixXd want(3, 3);
  want << 2, -1, -1, -1, 2, -1, -1, -1, 2;
  EXPECT_EQ(laplacian(triangle()), want);
}

TEST(Laplacian, EmptyGraphIsZero) { EXPECT_EQ(laplacian(WeightedGraph(3)), Eigen::MatrixXd::Zero(3, 3)); }

TEST(Laplacian, ParallelEdgesAdd) {
  WeightedGraph g(2);
  g.add_edge(0, 1, 2.0);
  g.add_edge(1, 0, 3.0);
  EXPECT_DOUBLE_EQ(laplacian(g)(0, 1), -5.0);
  EXPECT_EQ(g.num_edges(), 2u);
}

TEST(Laplacian, RejectsMalformedEdges) {
  WeightedGraph g(2);
  EXPECT_THROW(g.add_edge(0, 0), std::invalid_argument);
  EXPECT_THROW(g.add_edge(0, 2), std::out_of_range);
  EXPECT_THROW(g.add_edge(0, 1, 0.0), std::invalid_argument);
  EXPECT_THROW(g.add_edge(0, 1, -1.0), std::invalid_argument);
}

TEST(Laplacian, RowSumsAndQuadraticForm) {
  gen::Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    auto g = gen::connected_graph(30, 40, 10, rng);
    const auto L = laplacian(g);
    EXPECT_EQ(L.rowwise().sum().cwiseAbs().maxCoeff(), 0.0);
    EXPECT_TRUE(L.isApprox(L.transpose()));
    const LaplacianOperator op(g);
    for (int k = 0; k < 5; ++k) {
      Vector x = Vector::Random(30);
      double direct = 0.0;
      for (const auto& e : g.edges()) direct += e.w * (x[e.u] - x[e.v]) * (x[e.u] - x[e.v]);
      const double form = x.dot(L * x);
      EXPECT_NEAR(form, direct, 1e-9 * std::abs(direct));
      EXPECT_LE((op.apply(x) - L * x).norm(), 1e-9 * (L * x).norm() + 1e-12);
    }
  }
}

TEST(Laplacian, RankCountsComponents) {
  WeightedGraph g(5);
  g.add_edge(0, 1);
  g.add_edge(2, 3);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(laplacian(g));
  EXPECT_EQ(lu.rank(), 5 - 3);
  EXPECT_EQ(connected_components(g).count, 3u);
}

TEST(PseudoSolve, UnitEdge) {
  WeightedGraph g(2);
  g.add_edge(0, 1);
  Vector b(2);
  b << 1, -1;
  const auto r = pseudo_solve_oracle(laplacian(g), b);
  EXPECT_NEAR(r.x[0], 0.5, 1e-12);
  EXPECT_NEAR(r.x[1], -0.5, 1e-12);
  EXPECT_NEAR(r.projection_residual, 0.0, 1e-12);
}

TEST(PseudoSolve, ZeroRightHandSide) {
  const auto r = pseudo_solve_oracle(laplacian(triangle()), Vector::Zero(3));
  EXPECT_EQ(r.x, Vector::Zero(3));
}

TEST(PseudoSolve, Triangle) {
  Vector b(3);
  b << 2, -1, -1;
  const auto L = laplacian(triangle());
  const auto r = pseudo_solve_oracle(L, b);
  EXPECT_NEAR(r.x[0], 2.0 / 3, 1e-12);
  EXPECT_NEAR(r.x[1], -1.0 / 3, 1e-12);
  EXPECT_NEAR(r.x[2], -1.0 / 3, 1e-12);
  EXPECT_LE((L * r.x - b).norm(), 1e-12);
}

TEST(PseudoSolve, ProjectsKernelComponent) {
  const auto r = pseudo_solve_oracle(laplacian(triangle()), Vector::Ones(3));
  EXPECT_NEAR(r.projection_residual, std::sqrt(3.0), 1e-12);
  EXPECT_LE(r.x.norm(), 1e-12);
}

TEST(PseudoSolve, ResidualOnRandomGraphs) {
  gen::Rng rng(5);
  for (std::size_t n : {20u, 80u, 200u}) {
    auto g = gen::connected_graph(n, 2 * n, 50, rng);
    Vector b = Vector::Random(static_cast<Eigen::Index>(n));
    b.array() -= b.mean();
    const auto L = laplacian(g);
    const auto r = pseudo_solve_oracle(L, b);
    EXPECT_LE((L * r.x - b).norm(), 1e-8 * b.norm());
  }
}

TEST(PseudoSolve, SizeMismatch) { EXPECT_THROW(pseudo_solve_oracle(laplacian(triangle()), Vector::Zero(2)), DimensionMismatch); }

TEST(Conductance, K4) {
  WeightedGraph g(4);
  for (NodeId u = 0; u < 4; ++u)
    for (NodeId v = u + 1; v < 4; ++v) g.add_edge(u, v);
  EXPECT_DOUBLE_EQ(conductance_oracle(g), 2.0 / 3.0);
}

TEST(Conductance, SingleEdge) {
  WeightedGraph g(2);
  g.add_edge(0, 1);
  EXPECT_DOUBLE_EQ(conductance_oracle(g), 1.0);
}

TEST(Conductance, PathOfFour) {
  WeightedGraph g(4);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  g.add_edge(2, 3);
  EXPECT_DOUBLE_EQ(conductance_oracle(g), 1.0 / 3.0);
}

TEST(Conductance, Limits) {
  EXPECT_THROW(conductance_oracle(WeightedGraph(25)), TooLarge);
  EXPECT_THROW(conductance_oracle(WeightedGraph(3)), EmptyGraph);
}

TEST(Residue, ZeroFlow) {
  FlowNetwork g(3);
  g.add_arc(0, 1, 1);
  std::vector<double> f{0.0};
  EXPECT_EQ(residue<double>(g, f), std::vector<double>(3, 0.0));
}

TEST(Residue, SignConvention) {
  FlowNetwork g(2);
  g.add_arc(0, 1, 1);
  std::vector<double> f{1.0};
  const auto r = residue<double>(g, f);
  EXPECT_EQ(r[0], -1.0);
  EXPECT_EQ(r[1], 1.0);
}

TEST(Residue, DirectedTriangleCirculation) {
  FlowNetwork g(3);
  g.add_arc(0, 1, 1);
  g.add_arc(1, 2, 1);
  g.add_arc(2, 0, 1);
  std::vector<std::int64_t> f{1, 1, 1};
  EXPECT_EQ(residue<std::int64_t>(g, f), std::vector<double>(3, 0.0));
}

TEST(Residue, DemandIsSubtracted) {
  FlowNetwork g(2);
  g.add_arc(0, 1, 1);
  std::vector<std::int64_t> f{1};
  std::vector<std::int64_t> sigma{-1, 1};
  const auto r = residue<std::int64_t, std::int64_t>(g, f, sigma);
  EXPECT_EQ(r, std::vector<double>(2, 0.0));
}

TEST(ProjectToRange, SubtractsComponentMeans) {
  WeightedGraph g(4);
  g.add_edge(0, 1);
  g.add_edge(2, 3);
  Vector b(4);
  b << 1, 1, 3, -1;
  const double removed = project_to_range(connected_components(g), b);
  EXPECT_NEAR(b[0], 0.0, 1e-15);
  EXPECT_NEAR(b[2], 2.0, 1e-15);
  EXPECT_NEAR(removed, std::sqrt(4.0), 1e-12);
}
