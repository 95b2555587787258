#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include "errors.hpp"
#include "graph.hpp"

namespace cliqueflow {

struct ChebyConfig {
  double kappa = 1.0;
  double epsilon = 1e-6;
  double c_cheby = 1.0;

  void validate() const {
    if (!(kappa >= 1.0) || !std::isfinite(kappa)) throw std::invalid_argument("kappa must be finite and >= 1");
    if (!(epsilon > 0.0 && epsilon <= 0.5)) throw std::invalid_argument("epsilon must lie in (0, 1/2]");
  }

  std::size_t max_iters() const { return static_cast<std::size_t>(std::ceil(c_cheby * std::sqrt(kappa) * std::log(2.0 / epsilon))); }

  // smallest N with T_N((kappa+1)/(kappa-1)) >= 1/epsilon
  std::size_t iterations() const {
    if (kappa <= 1.0 + 1e-12) return 1;
    const double sigma = (kappa + 1.0) / (kappa - 1.0);
    return static_cast<std::size_t>(std::ceil(std::acosh(1.0 / epsilon) / std::acosh(sigma)));
  }
};

struct SolveReport {
  std::size_t iterations = 0;
  std::size_t max_iters = 0;
  std::uint64_t rounds = 0;
  double residual = 0.0;  // ||r||_{B^+} / ||b||_{B^+}
  double alpha = 1.0;
  double kappa = 1.0;
  double projection_residual = 0.0;
};

// Chebyshev iteration for A x = b preconditioned by B, assuming A <= B <= kappa A.
// The eigenvalues of B^{-1}A then lie in [1/kappa, 1]. The number of steps is
// fixed in advance, so the returned x is a fixed linear function of b.
template <class ApplyA, class SolveB>
std::pair<Vector, SolveReport> precon_cheby(ApplyA&& apply_a, SolveB&& solve_b, const Vector& b, const ChebyConfig& cfg) {
  cfg.validate();
  SolveReport rep;
  rep.kappa = cfg.kappa;
  rep.max_iters = cfg.max_iters();
  Vector x = Vector::Zero(b.size());
  if (b.size() == 0 || b.squaredNorm() == 0.0) return {x, rep};

  const std::size_t steps = cfg.iterations();
  if (steps > rep.max_iters) throw NoConvergence("iteration count exceeds the configured bound");

  Vector r = b;
  Vector z = solve_b(r);
  const double b_norm2 = b.dot(z);
  if (cfg.kappa <= 1.0 + 1e-12) {
    x = z;
    r -= apply_a(x);
    rep.iterations = 1;
  } else {
    const double lmin = 1.0 / cfg.kappa, lmax = 1.0;
    const double theta = 0.5 * (lmax + lmin), delta = 0.5 * (lmax - lmin);
    const double sigma = theta / delta;
    double rho = 1.0 / sigma;
    Vector d = z / theta;
    for (std::size_t k = 1; k <= steps; ++k) {
      x += d;
      r -= apply_a(d);
      rep.iterations = k;
      if (k == steps) break;
      z = solve_b(r);
      const double rho_next = 1.0 / (2.0 * sigma - rho);
      d = (rho_next * rho) * d + (2.0 * rho_next / delta) * z;
      rho = rho_next;
    }
  }

  // necessary condition for ||x - A^+ b||_A <= eps ||A^+ b||_A under A <= B <= kappa A
  const Vector zr = solve_b(r);
  const double r_norm2 = std::max(0.0, r.dot(zr));
  rep.residual = b_norm2 > 0.0 ? std::sqrt(r_norm2 / b_norm2) : 0.0;
  const double limit = cfg.epsilon * std::sqrt(cfg.kappa) * (1.0 + 1e-6) + 1e-12;
  if (!std::isfinite(rep.residual) || !x.allFinite() || rep.residual > limit)
    throw NoConvergence("preconditioned residual " + std::to_string(rep.residual) + " above " + std::to_string(limit));
  return {x, rep};
}

}  // namespace cliqueflow
