#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "clique_sim.hpp"
#include "errors.hpp"

namespace cliqueflow {

using EdgeId = std::uint32_t;
using Vector = Eigen::VectorXd;

struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  double w = 1.0;

  NodeId other(NodeId x) const noexcept { return x == u ? v : u; }
  friend bool operator==(const Edge&, const Edge&) = default;
};

// Undirected multigraph with positive weights. Parallel edges stay separate.
class WeightedGraph {
 public:
  WeightedGraph() = default;
  explicit WeightedGraph(std::size_t n) : n_(n) {}

  EdgeId add_edge(NodeId u, NodeId v, double w = 1.0) {
    if (u >= n_ || v >= n_) throw std::out_of_range("edge endpoint outside the vertex range");
    if (u == v) throw std::invalid_argument("self-loops are not allowed");
    if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("edge weights must be positive and finite");
    edges_.push_back({u, v, w});
    return static_cast<EdgeId>(edges_.size() - 1);
  }

  std::size_t num_vertices() const noexcept { return n_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  std::span<const Edge> edges() const noexcept { return edges_; }
  const Edge& edge(EdgeId e) const { return edges_.at(e); }

  double max_weight() const noexcept {
    double u = 0.0;
    for (const auto& e : edges_) u = std::max(u, e.w);
    return u;
  }
  double min_weight() const noexcept {
    double u = edges_.empty() ? 0.0 : edges_.front().w;
    for (const auto& e : edges_) u = std::min(u, e.w);
    return u;
  }

  std::vector<std::vector<EdgeId>> incidence() const {
    std::vector<std::vector<EdgeId>> inc(n_);
    for (EdgeId i = 0; i < edges_.size(); ++i) {
      inc[edges_[i].u].push_back(i);
      inc[edges_[i].v].push_back(i);
    }
    return inc;
  }

  // edge counts with multiplicity
  std::vector<std::size_t> degrees() const {
    std::vector<std::size_t> d(n_, 0);
    for (const auto& e : edges_) {
      ++d[e.u];
      ++d[e.v];
    }
    return d;
  }

  std::vector<double> weighted_degrees() const {
    std::vector<double> d(n_, 0.0);
    for (const auto& e : edges_) {
      d[e.u] += e.w;
      d[e.v] += e.w;
    }
    return d;
  }

  friend bool operator==(const WeightedGraph&, const WeightedGraph&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<Edge> edges_;
};

inline Eigen::MatrixXd laplacian(const WeightedGraph& g) {
  const auto n = static_cast<Eigen::Index>(g.num_vertices());
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : g.edges()) {
    L(e.u, e.u) += e.w;
    L(e.v, e.v) += e.w;
    L(e.u, e.v) -= e.w;
    L(e.v, e.u) -= e.w;
  }
  return L;
}

// Sparse Laplacian product in a fixed summation order.
class LaplacianOperator {
 public:
  explicit LaplacianOperator(const WeightedGraph& g) : n_(g.num_vertices()), start_(n_ + 1, 0), diag_(n_, 0.0) {
    std::vector<std::vector<std::pair<NodeId, double>>> adj(n_);
    for (const auto& e : g.edges()) {
      adj[e.u].emplace_back(e.v, e.w);
      adj[e.v].emplace_back(e.u, e.w);
      diag_[e.u] += e.w;
      diag_[e.v] += e.w;
    }
    for (std::size_t v = 0; v < n_; ++v) {
      auto& row = adj[v];
      std::ranges::sort(row);
      // merge parallel edges
      std::size_t k = 0;
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (k > 0 && row[k - 1].first == row[i].first)
          row[k - 1].second += row[i].second;
        else
          row[k++] = row[i];
      }
      row.resize(k);
      start_[v + 1] = start_[v] + k;
      for (auto [x, w] : row) {
        col_.push_back(x);
        val_.push_back(w);
      }
    }
  }

  std::size_t size() const noexcept { return n_; }

  Vector apply(const Vector& x) const {
    Vector y(static_cast<Eigen::Index>(n_));
    for (std::size_t v = 0; v < n_; ++v) {
      double acc = diag_[v] * x[static_cast<Eigen::Index>(v)];
      for (std::size_t i = start_[v]; i < start_[v + 1]; ++i) acc -= val_[i] * x[col_[i]];
      y[static_cast<Eigen::Index>(v)] = acc;
    }
    return y;
  }

  // number of distinct neighbours of v
  std::size_t neighbour_count(std::size_t v) const noexcept { return start_[v + 1] - start_[v]; }

 private:
  std::size_t n_;
  std::vector<std::size_t> start_;
  std::vector<NodeId> col_;
  std::vector<double> val_;
  std::vector<double> diag_;
};

struct Components {
  std::vector<std::uint32_t> label;  // per vertex, labels in order of first vertex
  std::size_t count = 0;
};

inline Components connected_components(std::size_t n, std::span<const Edge> edges) {
  std::vector<std::uint32_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0u);
  auto find = [&](std::uint32_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (const auto& e : edges) {
    auto a = find(e.u), b = find(e.v);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  Components c;
  c.label.assign(n, 0);
  std::vector<std::uint32_t> id(n, UINT32_MAX);
  for (std::size_t v = 0; v < n; ++v) {
    auto r = find(static_cast<std::uint32_t>(v));
    if (id[r] == UINT32_MAX) id[r] = static_cast<std::uint32_t>(c.count++);
    c.label[v] = id[r];
  }
  return c;
}

inline Components connected_components(const WeightedGraph& g) {
  return connected_components(g.num_vertices(), g.edges());
}

// Removes the per-component mean. Returns the norm of the removed part.
inline double project_to_range(const Components& comp, Vector& b) {
  std::vector<double> sum(comp.count, 0.0);
  std::vector<std::size_t> cnt(comp.count, 0);
  for (Eigen::Index v = 0; v < b.size(); ++v) {
    sum[comp.label[v]] += b[v];
    ++cnt[comp.label[v]];
  }
  double removed = 0.0;
  for (std::size_t c = 0; c < comp.count; ++c) {
    double mean = sum[c] / static_cast<double>(cnt[c]);
    removed += mean * mean * static_cast<double>(cnt[c]);
    sum[c] = mean;
  }
  for (Eigen::Index v = 0; v < b.size(); ++v) b[v] -= sum[comp.label[v]];
  return std::sqrt(removed);
}

// ---------------------------------------------------------------------------
// Directed flow networks

struct Arc {
  NodeId from = 0;
  NodeId to = 0;
  std::int64_t capacity = 1;
  std::int64_t cost = 0;

  friend bool operator==(const Arc&, const Arc&) = default;
};

class FlowNetwork {
 public:
  FlowNetwork() = default;
  explicit FlowNetwork(std::size_t n) : n_(n) {}

  EdgeId add_arc(NodeId from, NodeId to, std::int64_t capacity, std::int64_t cost = 0) {
    if (from >= n_ || to >= n_) throw std::out_of_range("arc endpoint outside the vertex range");
    if (from == to) throw std::invalid_argument("self-loops are not allowed");
    if (capacity < 0) throw std::invalid_argument("negative capacity");
    arcs_.push_back({from, to, capacity, cost});
    return static_cast<EdgeId>(arcs_.size() - 1);
  }

  std::size_t num_vertices() const noexcept { return n_; }
  std::size_t num_arcs() const noexcept { return arcs_.size(); }
  std::span<const Arc> arcs() const noexcept { return arcs_; }
  const Arc& arc(EdgeId e) const { return arcs_.at(e); }

  std::int64_t max_capacity() const noexcept {
    std::int64_t u = 0;
    for (const auto& a : arcs_) u = std::max(u, a.capacity);
    return u;
  }
  std::int64_t max_abs_cost() const noexcept {
    std::int64_t w = 0;
    for (const auto& a : arcs_) w = std::max(w, a.cost < 0 ? -a.cost : a.cost);
    return w;
  }

  friend bool operator==(const FlowNetwork&, const FlowNetwork&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<Arc> arcs_;
};

// residue(v) = inflow(v) - outflow(v) - sigma(v)
template <class T, class D = std::int64_t>
std::vector<double> residue(const FlowNetwork& g, std::span<const T> flow, std::span<const D> sigma = {}) {
  if (flow.size() != g.num_arcs()) throw DimensionMismatch("flow vector does not match arc count");
  if (!sigma.empty() && sigma.size() != g.num_vertices()) throw DimensionMismatch("demand vector size");
  std::vector<double> r(g.num_vertices(), 0.0);
  for (EdgeId e = 0; e < g.num_arcs(); ++e) {
    const auto& a = g.arc(e);
    r[a.to] += static_cast<double>(flow[e]);
    r[a.from] -= static_cast<double>(flow[e]);
  }
  for (std::size_t v = 0; v < sigma.size(); ++v) r[v] -= static_cast<double>(sigma[v]);
  return r;
}

// net amount leaving s
template <class T>
T flow_value(const FlowNetwork& g, std::span<const T> flow, NodeId s) {
  T value{};
  for (EdgeId e = 0; e < g.num_arcs(); ++e) {
    if (g.arc(e).from == s) value += flow[e];
    if (g.arc(e).to == s) value -= flow[e];
  }
  return value;
}

template <class T>
double flow_cost(const FlowNetwork& g, std::span<const T> flow) {
  double c = 0.0;
  for (EdgeId e = 0; e < g.num_arcs(); ++e) c += static_cast<double>(g.arc(e).cost) * static_cast<double>(flow[e]);
  return c;
}

}  // namespace cliqueflow
