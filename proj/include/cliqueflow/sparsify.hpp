#pragma once

// Spectral sparsification by binary weight classes: repeated expander
// decomposition, with every cluster replaced by a sparsified product demand
// graph whose approximation factor is measured, not assumed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "clique_sim.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "spectral.hpp"

namespace cliqueflow {

struct ExpanderDecomposition {
  std::vector<std::vector<NodeId>> clusters;  // sorted by smallest member
  std::vector<std::uint32_t> cluster_of;      // per vertex
  double eps_frac = 0.5;
  double phi = 1.0;                           // certified lower bound over non-singleton clusters
  std::vector<double> certificates;           // per cluster (1 for singletons)
  std::size_t crossing_edges = 0;
};

struct DecomposeOptions {
  // clusters up to this size are cut exactly, larger ones spectrally
  std::size_t exact_limit = 14;
};

namespace detail {

struct LocalGraph {
  std::vector<NodeId> vertices;                       // global ids, ascending
  std::vector<std::vector<std::uint32_t>> mult;       // local multiplicities
};

inline LocalGraph induced(const std::vector<NodeId>& verts, std::span<const Edge> edges,
                          const std::vector<std::int32_t>& local_of) {
  LocalGraph lg;
  lg.vertices = verts;
  const std::size_t k = verts.size();
  lg.mult.assign(k, std::vector<std::uint32_t>(k, 0));
  for (const auto& e : edges) {
    const auto a = local_of[e.u], b = local_of[e.v];
    if (a < 0 || b < 0) continue;
    ++lg.mult[a][b];
    ++lg.mult[b][a];
  }
  return lg;
}

inline std::vector<std::vector<std::size_t>> local_components(const LocalGraph& lg) {
  const std::size_t k = lg.vertices.size();
  std::vector<std::int32_t> comp(k, -1);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t s = 0; s < k; ++s) {
    if (comp[s] >= 0) continue;
    out.emplace_back();
    std::vector<std::size_t> stack{s};
    comp[s] = static_cast<std::int32_t>(out.size() - 1);
    while (!stack.empty()) {
      auto x = stack.back();
      stack.pop_back();
      out.back().push_back(x);
      for (std::size_t y = 0; y < k; ++y)
        if (lg.mult[x][y] && comp[y] < 0) {
          comp[y] = comp[s];
          stack.push_back(y);
        }
    }
    std::ranges::sort(out.back());
  }
  return out;
}

// Fiedler sweep on the normalized Laplacian. Returns lambda_2 / 2 and the
// best prefix cut.
inline std::pair<double, CutResult> spectral_cut(const LocalGraph& lg) {
  const auto k = static_cast<Eigen::Index>(lg.vertices.size());
  std::vector<double> deg(k, 0.0);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) deg[i] += lg.mult[i][j];
  Eigen::MatrixXd N = Eigen::MatrixXd::Identity(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j)
      if (lg.mult[i][j]) N(i, j) -= lg.mult[i][j] / std::sqrt(deg[i] * deg[j]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(N);
  const double lambda2 = es.eigenvalues()[1];
  Eigen::VectorXd f = es.eigenvectors().col(1);
  // fix the sign so the output does not depend on the eigensolver's choice
  Eigen::Index pivot = 0;
  for (Eigen::Index i = 1; i < k; ++i)
    if (std::abs(f[i]) > std::abs(f[pivot]) + 1e-12) pivot = i;
  if (f[pivot] < 0) f = -f;
  std::vector<Eigen::Index> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::ranges::stable_sort(order, [&](Eigen::Index a, Eigen::Index b) {
    return f[a] / std::sqrt(deg[a]) < f[b] / std::sqrt(deg[b]);
  });
  double total = std::accumulate(deg.begin(), deg.end(), 0.0);
  std::vector<bool> in(k, false);
  double cut = 0.0, vol = 0.0;
  CutResult best;
  Eigen::Index best_len = 1;
  for (Eigen::Index p = 0; p + 1 < k; ++p) {
    const auto x = order[p];
    double to_s = 0.0;
    for (Eigen::Index y = 0; y < k; ++y)
      if (in[y]) to_s += lg.mult[x][y];
    cut += deg[x] - 2.0 * to_s;
    vol += deg[x];
    in[x] = true;
    const double small = std::min(vol, total - vol);
    if (small <= 0.0) continue;
    const double phi = cut / small;
    if (phi < best.conductance) {
      best.conductance = phi;
      best_len = p + 1;
    }
  }
  best.side.assign(k, false);
  for (Eigen::Index p = 0; p < best_len; ++p) best.side[order[p]] = true;
  return {lambda2 / 2.0, best};
}

}  // namespace detail

// Deterministic recursive partitioning. A cluster is accepted when its
// conductance is certified: exactly for small clusters, through the Cheeger
// lower bound lambda_2/2 for larger ones.
inline ExpanderDecomposition expander_decompose(const WeightedGraph& g, double eps_frac, double phi_target,
                                                const DecomposeOptions& opt = {}) {
  if (!(eps_frac > 0.0 && eps_frac < 1.0)) throw std::invalid_argument("eps_frac must lie in (0,1)");
  const std::size_t n = g.num_vertices();
  ExpanderDecomposition out;
  out.eps_frac = eps_frac;
  std::vector<std::pair<std::vector<NodeId>, double>> done;
  std::deque<std::vector<NodeId>> todo;
  {
    std::vector<NodeId> all(n);
    std::iota(all.begin(), all.end(), 0u);
    if (n > 0) todo.push_back(std::move(all));
  }
  std::vector<std::int32_t> local_of(n, -1);
  while (!todo.empty()) {
    auto verts = std::move(todo.front());
    todo.pop_front();
    for (std::size_t i = 0; i < verts.size(); ++i) local_of[verts[i]] = static_cast<std::int32_t>(i);
    auto lg = detail::induced(verts, g.edges(), local_of);
    for (auto v : verts) local_of[v] = -1;

    auto comps = detail::local_components(lg);
    if (comps.size() > 1) {
      for (const auto& c : comps) {
        std::vector<NodeId> sub;
        for (auto i : c) sub.push_back(verts[i]);
        if (sub.size() == 1)
          done.emplace_back(std::move(sub), 1.0);
        else
          todo.push_back(std::move(sub));
      }
      continue;
    }
    if (verts.size() == 1) {
      done.emplace_back(std::move(verts), 1.0);
      continue;
    }
    double certificate;
    CutResult cut;
    if (verts.size() <= opt.exact_limit) {
      cut = exact_min_conductance_cut(lg.mult);
      certificate = cut.conductance;
    } else {
      std::tie(certificate, cut) = detail::spectral_cut(lg);
    }
    if (certificate >= phi_target) {
      done.emplace_back(std::move(verts), certificate);
      continue;
    }
    std::vector<NodeId> a, b;
    for (std::size_t i = 0; i < verts.size(); ++i) (cut.side[i] ? a : b).push_back(verts[i]);
    todo.push_back(std::move(a));
    todo.push_back(std::move(b));
  }
  std::ranges::sort(done, [](const auto& x, const auto& y) { return x.first.front() < y.first.front(); });
  out.cluster_of.assign(n, 0);
  out.phi = 1.0;
  for (std::size_t c = 0; c < done.size(); ++c) {
    for (auto v : done[c].first) out.cluster_of[v] = static_cast<std::uint32_t>(c);
    if (done[c].first.size() > 1) out.phi = std::min(out.phi, done[c].second);
    out.clusters.push_back(std::move(done[c].first));
    out.certificates.push_back(done[c].second);
  }
  for (const auto& e : g.edges())
    if (out.cluster_of[e.u] != out.cluster_of[e.v]) ++out.crossing_edges;
  if (static_cast<double>(out.crossing_edges) > eps_frac * static_cast<double>(g.num_edges()))
    throw CannotCertify("decomposition leaves " + std::to_string(out.crossing_edges) + " crossing edges");
  return out;
}

// Complete graph with w(u,v) = deg(u) deg(v); zero-degree vertices stay isolated.
inline WeightedGraph product_demand_graph(std::span<const double> degrees) {
  const std::size_t n = degrees.size();
  if (std::ranges::count_if(degrees, [](double d) { return d > 0; }) < 2)
    throw std::invalid_argument("product demand graph needs two vertices of positive degree");
  WeightedGraph d(n);
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v)
      if (degrees[u] > 0 && degrees[v] > 0) d.add_edge(u, v, degrees[u] * degrees[v]);
  return d;
}

struct SparsifiedDemand {
  WeightedGraph graph;
  double alpha = 1.0;
  bool fallback = false;  // true when the dense input was returned unchanged
};

struct ProductDemandOptions {
  std::size_t c_pd = 16;      // inputs with at most this many vertices are returned as is
  std::size_t hubs = 4;       // heaviest vertices every vertex links to
  std::size_t cycles = 6;     // pseudo-random Hamiltonian cycles
  std::size_t scaling_sweeps = 60;
};

// Sparse degree-matched substitute for a product demand graph. The result is
// checked against d with dense generalized eigenvalues and rescaled to the
// geometric middle of its spectrum. If it is not within factor 2, d itself is
// returned.
inline SparsifiedDemand sparsify_product_demand(const WeightedGraph& d, const ProductDemandOptions& opt = {}) {
  const std::size_t n = d.num_vertices();
  const auto wdeg = d.weighted_degrees();
  std::vector<NodeId> live;
  for (NodeId v = 0; v < n; ++v)
    if (wdeg[v] > 0) live.push_back(v);
  if (live.size() <= opt.c_pd) return {d, 1.0, false};

  std::map<std::pair<NodeId, NodeId>, double> weight;
  for (const auto& e : d.edges()) weight[{std::min(e.u, e.v), std::max(e.u, e.v)}] += e.w;

  std::set<std::pair<NodeId, NodeId>> keep;
  auto add = [&](NodeId a, NodeId b) {
    if (a != b) keep.insert({std::min(a, b), std::max(a, b)});
  };
  std::vector<NodeId> by_degree = live;
  std::ranges::stable_sort(by_degree, [&](NodeId a, NodeId b) { return wdeg[a] > wdeg[b]; });
  const std::size_t hubs = std::min(opt.hubs, by_degree.size());
  for (auto v : live)
    for (std::size_t h = 0; h < hubs; ++h) add(v, by_degree[h]);
  std::mt19937_64 mix(0x9e3779b97f4a7c15ULL);  // fixed: the construction is deterministic
  std::vector<NodeId> perm = live;
  for (std::size_t c = 0; c < opt.cycles; ++c) {
    for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[mix() % (i + 1)]);
    for (std::size_t i = 0; i < perm.size(); ++i) add(perm[i], perm[(i + 1) % perm.size()]);
  }

  // symmetric scaling w'(u,v) = s_u s_v w(u,v) matching the weighted degrees of d
  std::vector<std::pair<NodeId, NodeId>> pairs(keep.begin(), keep.end());
  std::vector<double> base(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) base[i] = weight.at(pairs[i]);
  std::vector<double> s(n, 1.0);
  {
    double kept = std::accumulate(base.begin(), base.end(), 0.0);
    double all = 0.0;
    for (const auto& e : d.edges()) all += e.w;
    std::ranges::fill(s, std::sqrt(all / kept));
  }
  std::vector<double> cur(n);
  for (std::size_t sweep = 0; sweep < opt.scaling_sweeps; ++sweep) {
    std::ranges::fill(cur, 0.0);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const double w = base[i] * s[pairs[i].first] * s[pairs[i].second];
      cur[pairs[i].first] += w;
      cur[pairs[i].second] += w;
    }
    for (auto v : live) s[v] *= std::sqrt(wdeg[v] / cur[v]);
  }
  WeightedGraph h(n);
  for (std::size_t i = 0; i < pairs.size(); ++i)
    h.add_edge(pairs[i].first, pairs[i].second, base[i] * s[pairs[i].first] * s[pairs[i].second]);

  const auto range = relative_spectrum(d, h);
  const double scale = std::sqrt(range.lo * range.hi);
  const double alpha = std::sqrt(range.hi / range.lo);
  if (!(alpha <= 2.0)) return {d, 1.0, true};
  WeightedGraph scaled(n);
  for (const auto& e : h.edges()) scaled.add_edge(e.u, e.v, e.w * scale);
  return {std::move(scaled), alpha, false};
}

struct SparsifyOptions {
  DecomposeOptions decompose;
  ProductDemandOptions product_demand;
  // substitute round charge for one decomposition on n vertices
  std::function<std::uint64_t(std::size_t n, double r)> decomposition_charge = [](std::size_t n, double r) {
    return static_cast<std::uint64_t>(std::ceil(std::pow(static_cast<double>(std::max<std::size_t>(n, 1)), 1.0 / (r * r))));
  };
  std::uint64_t route_rounds = kDefaultRouteRounds;
};

struct SparsifyStats {
  std::size_t weight_classes = 0;
  std::size_t levels = 0;           // summed over classes
  std::size_t clusters = 0;         // clusters carrying at least one edge
  std::size_t fallbacks = 0;
  double min_phi = 1.0;             // smallest certified conductance used
  double max_piece_alpha = 1.0;
  std::uint64_t rounds = 0;
  std::vector<std::size_t> level_edges;  // edges entering each level, all classes in order
};

struct SpectralSparsifier {
  WeightedGraph h;
  double alpha = 1.0;
  SparsifyStats stats;
};

inline SpectralSparsifier spectral_sparsify(const WeightedGraph& g, double r, RoundLedger& ledger,
                                            const SparsifyOptions& opt = {}) {
  if (!(r >= 1.0)) throw std::invalid_argument("r must be at least 1");
  const std::size_t n = g.num_vertices();
  const std::size_t m = g.num_edges();
  SpectralSparsifier out;
  out.h = WeightedGraph(n);
  if (m == 0) return out;
  for (const auto& e : g.edges())
    if (e.w < 1.0) throw std::invalid_argument("spectral_sparsify expects weights >= 1");

  const double logm = std::log2(std::max<double>(static_cast<double>(m), 4.0));
  const double phi_start = std::pow(logm, -2.0 * r * r);
  const double phi_floor = 1.0 / static_cast<double>(std::max<std::size_t>(m, 2));

  std::map<int, std::vector<EdgeId>> classes;
  for (EdgeId i = 0; i < m; ++i) classes[static_cast<int>(std::floor(std::log2(g.edge(i).w)))].push_back(i);
  out.stats.weight_classes = classes.size();

  std::uint64_t decompose_rounds = 0, level_rounds = 0;
  std::vector<std::int32_t> local_of(n, -1);
  for (const auto& [cls, class_edges] : classes) {
    const double class_weight = std::ldexp(1.0, cls);
    std::vector<EdgeId> current = class_edges;
    std::size_t guard = 0;
    while (!current.empty()) {
      if (++guard > 2 * static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(m) + 1))) + 4)
        throw CannotCertify("level count exceeded");
      out.stats.level_edges.push_back(current.size());
      WeightedGraph level(n);
      for (auto e : current) level.add_edge(g.edge(e).u, g.edge(e).v, 1.0);
      ExpanderDecomposition dec;
      double phi = phi_start;
      for (;;) {
        try {
          dec = expander_decompose(level, 0.5, phi, opt.decompose);
          break;
        } catch (const CannotCertify&) {
          phi /= 2.0;
          if (phi < phi_floor) throw;
        }
      }
      decompose_rounds += opt.decomposition_charge(n, r);
      level_rounds += 1;  // each vertex announces its degree inside its cluster
      out.stats.min_phi = std::min(out.stats.min_phi, dec.phi);
      ++out.stats.levels;

      std::vector<std::vector<EdgeId>> inside(dec.clusters.size());
      std::vector<EdgeId> crossing;
      for (auto e : current) {
        const auto cu = dec.cluster_of[g.edge(e).u], cv = dec.cluster_of[g.edge(e).v];
        (cu == cv ? inside[cu] : crossing).push_back(e);
      }
      for (std::size_t c = 0; c < dec.clusters.size(); ++c) {
        if (inside[c].empty()) continue;
        ++out.stats.clusters;
        const auto& verts = dec.clusters[c];
        for (std::size_t i = 0; i < verts.size(); ++i) local_of[verts[i]] = static_cast<std::int32_t>(i);
        WeightedGraph piece(verts.size());
        std::vector<double> deg(verts.size(), 0.0);
        for (auto e : inside[c]) {
          const auto a = static_cast<NodeId>(local_of[g.edge(e).u]), b = static_cast<NodeId>(local_of[g.edge(e).v]);
          piece.add_edge(a, b, g.edge(e).w);
          deg[a] += 1.0;
          deg[b] += 1.0;
        }
        auto demand = product_demand_graph(deg);
        const double scale = class_weight * 2.0 / static_cast<double>(inside[c].size());
        WeightedGraph scaled(verts.size());
        for (const auto& e : demand.edges()) scaled.add_edge(e.u, e.v, e.w * scale);
        auto sparse = sparsify_product_demand(scaled, opt.product_demand);
        if (sparse.fallback) ++out.stats.fallbacks;
        const auto range = relative_spectrum(piece, sparse.graph);
        const double balance = std::sqrt(range.lo * range.hi);
        out.stats.max_piece_alpha = std::max(out.stats.max_piece_alpha, std::sqrt(range.hi / range.lo));
        for (const auto& e : sparse.graph.edges()) out.h.add_edge(verts[e.u], verts[e.v], e.w * balance);
        for (auto v : verts) local_of[v] = -1;
      }
      current = std::move(crossing);
    }
  }
  out.alpha = out.stats.max_piece_alpha;

  // every node learns H: one edge record per message through routing batches
  std::vector<std::size_t> owned(n, 0);
  for (const auto& e : out.h.edges()) ++owned[std::min(e.u, e.v)];
  std::size_t send_load = 0;
  for (auto k : owned) send_load = std::max(send_load, k * (n - 1));
  const std::size_t recv_load = out.h.num_edges();
  const std::uint64_t batches = (std::max(send_load, recv_load) + n - 1) / n;
  const std::uint64_t broadcast_rounds = batches * opt.route_rounds;

  ledger.charge("sparsify:decompose(substitute)", decompose_rounds);
  ledger.charge("sparsify:levels", level_rounds);
  ledger.charge("sparsify:broadcast", broadcast_rounds);
  out.stats.rounds = decompose_rounds + level_rounds + broadcast_rounds;
  return out;
}

// True iff every generalized eigenvalue of (L_G, L_H) on the joint range lies in [1/alpha, alpha].
inline bool check_sparsifier(const WeightedGraph& g, const WeightedGraph& h, double alpha) {
  if (g.num_vertices() > 400) throw TooLarge("dense sparsifier check supports at most 400 vertices");
  const auto range = relative_spectrum(g, h);
  const double tol = 1e-9;
  return range.lo >= (1.0 / alpha) * (1.0 - tol) && range.hi <= alpha * (1.0 + tol);
}

}  // namespace cliqueflow
