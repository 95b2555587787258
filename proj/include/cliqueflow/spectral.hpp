#pragma once

// Dense spectral tools: exact pseudo-inverse solves, exhaustive conductance,
// and generalized eigenvalue ranges of Laplacian pairs. All of these are
// cubic or exponential and meant for small graphs and test oracles.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "graph.hpp"

namespace cliqueflow {

struct PseudoSolve {
  Vector x;
  double projection_residual = 0.0;  // norm of the part of b outside range(L)
};

inline PseudoSolve pseudo_solve_oracle(const Eigen::MatrixXd& L, const Vector& b) {
  if (L.rows() != L.cols() || L.rows() != b.size()) throw DimensionMismatch("laplacian and right-hand side sizes differ");
  PseudoSolve out;
  out.x = Vector::Zero(b.size());
  if (b.size() == 0) return out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
  const auto& lam = es.eigenvalues();
  const auto& V = es.eigenvectors();
  const double tol = 1e-9 * std::max(1.0, lam.cwiseAbs().maxCoeff());
  Vector coef = V.transpose() * b;
  Vector in_range = Vector::Zero(b.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam[i] > tol) {
      out.x += (coef[i] / lam[i]) * V.col(i);
      in_range += coef[i] * V.col(i);
    }
  }
  out.projection_residual = (b - in_range).norm();
  return out;
}

struct CutResult {
  double conductance = std::numeric_limits<double>::infinity();
  std::vector<bool> side;  // true for vertices in S
};

// Exhaustive minimum-conductance cut over an edge-multiplicity matrix.
// Volumes count edges with multiplicity; sets whose smaller side has zero
// volume are skipped.
inline CutResult exact_min_conductance_cut(const std::vector<std::vector<std::uint32_t>>& mult) {
  const std::size_t n = mult.size();
  CutResult best;
  if (n < 2) return best;
  std::vector<std::uint64_t> deg(n, 0);
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) deg[i] += mult[i][j];
    total += deg[i];
  }
  // vertex n-1 always stays outside S, so each cut is visited once
  const std::uint64_t limit = std::uint64_t{1} << (n - 1);
  std::vector<bool> in(n, false);
  std::int64_t cut = 0;
  std::uint64_t vol = 0;
  std::uint64_t best_mask = 0;
  std::uint64_t gray = 0;
  for (std::uint64_t k = 1; k < limit; ++k) {
    const auto x = static_cast<std::size_t>(std::countr_zero(k));
    std::int64_t to_s = 0;
    for (std::size_t y = 0; y < n; ++y)
      if (in[y]) to_s += mult[x][y];
    if (!in[x]) {
      cut += static_cast<std::int64_t>(deg[x]) - 2 * to_s;
      vol += deg[x];
    } else {
      cut -= static_cast<std::int64_t>(deg[x]) - 2 * to_s;
      vol -= deg[x];
    }
    in[x] = !in[x];
    gray ^= std::uint64_t{1} << x;
    const std::uint64_t small = std::min(vol, total - vol);
    if (small == 0) continue;
    const double phi = static_cast<double>(cut) / static_cast<double>(small);
    if (phi < best.conductance) {
      best.conductance = phi;
      best_mask = gray;
    }
  }
  best.side.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) best.side[i] = (best_mask >> i) & 1u;
  return best;
}

inline double conductance_oracle(const WeightedGraph& g) {
  const std::size_t n = g.num_vertices();
  if (n > 24) throw TooLarge("exhaustive conductance supports at most 24 vertices");
  if (g.num_edges() == 0) throw EmptyGraph("conductance of a graph without edges");
  std::vector<std::vector<std::uint32_t>> mult(n, std::vector<std::uint32_t>(n, 0));
  for (const auto& e : g.edges()) {
    ++mult[e.u][e.v];
    ++mult[e.v][e.u];
  }
  return exact_min_conductance_cut(mult).conductance;
}

struct SpectrumRange {
  double lo = 1.0;
  double hi = 1.0;
};

// Range of the nonzero generalized eigenvalues of (L_G, L_H). Each connected
// component is grounded at its first vertex so that L_H becomes definite.
inline SpectrumRange relative_spectrum(const WeightedGraph& g, const WeightedGraph& h) {
  if (g.num_vertices() != h.num_vertices()) throw DimensionMismatch("graphs have different vertex counts");
  const auto cg = connected_components(g);
  const auto ch = connected_components(h);
  if (cg.label != ch.label) throw RangeMismatch("laplacian kernels differ");
  const Eigen::MatrixXd LG = laplacian(g);
  const Eigen::MatrixXd LH = laplacian(h);
  std::vector<std::vector<Eigen::Index>> members(cg.count);
  for (std::size_t v = 0; v < cg.label.size(); ++v) members[cg.label[v]].push_back(static_cast<Eigen::Index>(v));
  SpectrumRange r{std::numeric_limits<double>::infinity(), 0.0};
  bool any = false;
  for (const auto& comp : members) {
    if (comp.size() < 2) continue;
    const auto k = static_cast<Eigen::Index>(comp.size() - 1);
    Eigen::MatrixXd A(k, k), B(k, k);
    for (Eigen::Index i = 0; i < k; ++i)
      for (Eigen::Index j = 0; j < k; ++j) {
        A(i, j) = LG(comp[i + 1], comp[j + 1]);
        B(i, j) = LH(comp[i + 1], comp[j + 1]);
      }
    if (k == 1) {
      // two vertices: the pencil is a scalar ratio, skip the Cholesky round-off
      const double ratio = A(0, 0) / B(0, 0);
      r.lo = std::min(r.lo, ratio);
      r.hi = std::max(r.hi, ratio);
      any = true;
      continue;
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(A, B, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw SolverFailure("generalized eigenvalue problem failed");
    r.lo = std::min(r.lo, es.eigenvalues().minCoeff());
    r.hi = std::max(r.hi, es.eigenvalues().maxCoeff());
    any = true;
  }
  if (!any) return SpectrumRange{};
  return r;
}

}  // namespace cliqueflow
