#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "chebyshev.hpp"
#include "clique_sim.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "sparsify.hpp"

namespace cliqueflow {

// Exact pseudo-inverse application for a sparse Laplacian: every component
// is grounded at its first vertex and factored once.
class LaplacianFactor {
 public:
  explicit LaplacianFactor(const WeightedGraph& h) : comp_(connected_components(h)), n_(h.num_vertices()) {
    std::vector<bool> ground(n_, false);
    std::vector<bool> seen(comp_.count, false);
    for (std::size_t v = 0; v < n_; ++v) {
      if (!seen[comp_.label[v]]) {
        seen[comp_.label[v]] = true;
        ground[v] = true;
      }
    }
    index_.assign(n_, -1);
    Eigen::Index k = 0;
    for (std::size_t v = 0; v < n_; ++v)
      if (!ground[v]) index_[v] = k++;
    reduced_ = k;
    if (k == 0) return;
    std::vector<Eigen::Triplet<double>> t;
    for (const auto& e : h.edges()) {
      const auto a = index_[e.u], b = index_[e.v];
      if (a >= 0) t.emplace_back(a, a, e.w);
      if (b >= 0) t.emplace_back(b, b, e.w);
      if (a >= 0 && b >= 0) {
        t.emplace_back(a, b, -e.w);
        t.emplace_back(b, a, -e.w);
      }
    }
    Eigen::SparseMatrix<double> M(k, k);
    M.setFromTriplets(t.begin(), t.end());
    solver_.compute(M);
    if (solver_.info() != Eigen::Success) throw SolverFailure("laplacian factorization failed");
  }

  const Components& components() const noexcept { return comp_; }

  // L^+ r for r in range(L); the result has zero mean on every component
  Vector solve(Vector r) const {
    project_to_range(comp_, r);
    Vector x = Vector::Zero(static_cast<Eigen::Index>(n_));
    if (reduced_ > 0) {
      Vector rr(reduced_);
      for (std::size_t v = 0; v < n_; ++v)
        if (index_[v] >= 0) rr[index_[v]] = r[static_cast<Eigen::Index>(v)];
      Vector xr = solver_.solve(rr);
      for (std::size_t v = 0; v < n_; ++v)
        if (index_[v] >= 0) x[static_cast<Eigen::Index>(v)] = xr[index_[v]];
    }
    project_to_range(comp_, x);
    return x;
  }

 private:
  Components comp_;
  std::size_t n_;
  std::vector<Eigen::Index> index_;
  Eigen::Index reduced_ = 0;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver_;
};

struct LaplacianSolveOptions {
  double c_cheby = 1.0;
  bool strict_range = false;  // throw instead of projecting b
  double range_tolerance = 1e-9;
};

namespace detail {

inline void charge_matvec(const WeightedGraph& g, const LaplacianOperator& op, std::uint64_t products,
                          RoundLedger& ledger) {
  if (products == 0) return;
  RoundLedger scratch;
  CliqueNetwork<> net(std::max<std::size_t>(g.num_vertices(), 1), scratch);
  std::vector<std::size_t> load(net.size(), 0);
  for (std::size_t v = 0; v < g.num_vertices(); ++v) load[v] = op.neighbour_count(v);
  net.set_phase("solve:matvec");
  net.charge_pattern(load, load, products);
  ledger.merge(scratch);
}

}  // namespace detail

// Chebyshev iteration with A = L_G and B = alpha L_H; since
// L_G <= alpha L_H <= alpha^2 L_G the condition bound is alpha^2.
inline std::pair<Vector, SolveReport> laplacian_solve(const WeightedGraph& g, const SpectralSparsifier& h, Vector b,
                                                      double epsilon, RoundLedger& ledger,
                                                      const LaplacianSolveOptions& opt = {}) {
  if (static_cast<std::size_t>(b.size()) != g.num_vertices()) throw DimensionMismatch("right-hand side size");
  const LaplacianOperator op(g);
  const LaplacianFactor factor(h.h);
  const double b_norm = b.norm();
  const double removed = project_to_range(factor.components(), b);
  if (opt.strict_range && removed > opt.range_tolerance * std::max(1.0, b_norm))
    throw DisconnectedWithInfeasibleB("right-hand side is not orthogonal to the laplacian kernel");
  const double alpha = std::max(1.0, h.alpha);
  ChebyConfig cfg{alpha * alpha, std::min(epsilon, 0.5), opt.c_cheby};
  auto [x, rep] = precon_cheby([&](const Vector& v) { return op.apply(v); },
                               [&](const Vector& r) -> Vector { return factor.solve(r) / alpha; }, b, cfg);
  rep.alpha = alpha;
  rep.projection_residual = removed;
  detail::charge_matvec(g, op, rep.iterations, ledger);
  rep.rounds = rep.iterations;
  return {std::move(x), rep};
}

struct DistributedSolveOptions {
  double r = 1.0;
  double granularity = 0.0;  // weight rounding unit relative to the smallest weight; 0 means epsilon
  LaplacianSolveOptions solve;
  SparsifyOptions sparsify;
};

struct DistributedSolve {
  Vector y;
  SolveReport report;
  double rounding_factor = 1.0;
  double sparsifier_alpha = 1.0;
  SparsifyStats sparsify_stats;
};

// Weights are normalised by the smallest weight, rounded to integer multiples
// of the granularity, sparsified, and the sparsifier is scaled back. The
// certified factor is the product of the rounding and sparsification factors.
inline DistributedSolve solve_distributed(const WeightedGraph& g, const Vector& b, double epsilon, RoundLedger& ledger,
                                          const DistributedSolveOptions& opt = {}) {
  if (static_cast<std::size_t>(b.size()) != g.num_vertices()) throw DimensionMismatch("right-hand side size");
  const std::size_t n = g.num_vertices();
  DistributedSolve out;
  const double unit = (opt.granularity > 0.0 ? opt.granularity : epsilon) * (g.num_edges() ? g.min_weight() : 1.0);
  WeightedGraph rounded(n);
  double factor = 1.0;
  for (const auto& e : g.edges()) {
    const double k = std::max(1.0, std::round(e.w / unit));
    rounded.add_edge(e.u, e.v, k);
    const double ratio = e.w / (k * unit);
    factor = std::max({factor, ratio, 1.0 / ratio});
  }
  auto sp = spectral_sparsify(rounded, opt.r, ledger, opt.sparsify);
  SpectralSparsifier scaled;
  scaled.h = WeightedGraph(n);
  for (const auto& e : sp.h.edges()) scaled.h.add_edge(e.u, e.v, e.w * unit);
  scaled.alpha = sp.alpha * factor;
  scaled.stats = sp.stats;
  auto [y, rep] = laplacian_solve(g, scaled, b, epsilon, ledger, opt.solve);
  rep.rounds += sp.stats.rounds;
  out.y = std::move(y);
  out.report = rep;
  out.rounding_factor = factor;
  out.sparsifier_alpha = sp.alpha;
  out.sparsify_stats = sp.stats;
  return out;
}

}  // namespace cliqueflow
