#pragma once

// Text instances in a DIMACS-like line format. Vertex ids are 1-based in
// files and 0-based in memory.
//
//   c <anything>            comment
//   p <kind> <n> <m>        kind: max, min, lap, sparsify, orient, round
//   a <u> <v> <cap> [cost]  arc (directed kinds) or edge with weight (undirected kinds)
//   n <v> s | n <v> t       terminals
//   n <v> <d>               demand: inflow minus outflow required at v
//   b <v> <value>           Laplacian right-hand side
//   f <k> <value>           fractional flow on the k-th arc (round)

#include <charconv>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "errors.hpp"
#include "graph.hpp"

namespace cliqueflow {

enum class ProblemKind { max_flow, min_cost, laplacian, sparsify, orient, round };

inline std::string_view kind_name(ProblemKind k) {
  switch (k) {
    case ProblemKind::max_flow: return "max";
    case ProblemKind::min_cost: return "min";
    case ProblemKind::laplacian: return "lap";
    case ProblemKind::sparsify: return "sparsify";
    case ProblemKind::orient: return "orient";
    case ProblemKind::round: return "round";
  }
  return "?";
}

inline bool is_directed(ProblemKind k) {
  return k == ProblemKind::max_flow || k == ProblemKind::min_cost || k == ProblemKind::round;
}

struct Instance {
  ProblemKind kind = ProblemKind::max_flow;
  std::size_t n = 0;
  FlowNetwork network;  // directed kinds
  WeightedGraph graph;  // undirected kinds
  std::optional<NodeId> source;
  std::optional<NodeId> sink;
  std::vector<std::int64_t> demand;  // empty when no demand lines were given
  Vector rhs;                        // laplacian kind only
  std::vector<double> flow;          // round kind only, one entry per arc
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <class T>
T parse_number(std::string_view tok, std::size_t line, const char* what) {
  T value{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ParseError(line, std::string("bad ") + what + " '" + std::string(tok) + "'");
  return value;
}

inline ProblemKind parse_kind(std::string_view tok, std::size_t line) {
  if (tok == "max") return ProblemKind::max_flow;
  if (tok == "min") return ProblemKind::min_cost;
  if (tok == "lap") return ProblemKind::laplacian;
  if (tok == "sparsify") return ProblemKind::sparsify;
  if (tok == "orient") return ProblemKind::orient;
  if (tok == "round") return ProblemKind::round;
  throw ParseError(line, "unknown problem kind '" + std::string(tok) + "'");
}

}  // namespace detail

inline Instance parse_instance(std::istream& in) {
  Instance inst;
  bool have_header = false;
  std::size_t declared_m = 0;
  std::size_t arcs = 0;
  std::vector<std::optional<double>> flows;
  std::vector<char> demand_set;
  std::string raw;
  std::size_t lineno = 0;

  auto vertex = [&](std::string_view tok, std::size_t line) {
    const auto id = detail::parse_number<std::int64_t>(tok, line, "vertex id");
    if (id < 1 || static_cast<std::size_t>(id) > inst.n)
      throw ParseError(line, "vertex id " + std::string(tok) + " outside 1.." + std::to_string(inst.n));
    return static_cast<NodeId>(id - 1);
  };

  while (std::getline(in, raw)) {
    ++lineno;
    const auto f = detail::split_fields(raw);
    if (f.empty() || f[0] == "c") continue;
    if (f[0] == "p") {
      if (have_header) throw ParseError(lineno, "second problem line");
      if (f.size() != 4) throw ParseError(lineno, "expected 'p <kind> <n> <m>'");
      inst.kind = detail::parse_kind(f[1], lineno);
      const auto n = detail::parse_number<std::int64_t>(f[2], lineno, "vertex count");
      const auto m = detail::parse_number<std::int64_t>(f[3], lineno, "arc count");
      if (n < 0 || m < 0) throw ParseError(lineno, "negative size");
      inst.n = static_cast<std::size_t>(n);
      declared_m = static_cast<std::size_t>(m);
      inst.network = FlowNetwork(inst.n);
      inst.graph = WeightedGraph(inst.n);
      inst.rhs = Vector::Zero(static_cast<Eigen::Index>(inst.n));
      demand_set.assign(inst.n, 0);
      have_header = true;
      continue;
    }
    if (!have_header) throw ParseError(lineno, "record before the problem line");

    if (f[0] == "a") {
      if (f.size() < 4 || f.size() > 5) throw ParseError(lineno, "expected 'a <u> <v> <cap> [cost]'");
      if (++arcs > declared_m) throw ParseError(lineno, "more arcs than declared");
      const NodeId u = vertex(f[1], lineno);
      const NodeId v = vertex(f[2], lineno);
      if (u == v) throw ValidationError("line " + std::to_string(lineno) + ": self-loop");
      if (is_directed(inst.kind)) {
        const auto cap = detail::parse_number<std::int64_t>(f[3], lineno, "capacity");
        const auto cost = f.size() == 5 ? detail::parse_number<std::int64_t>(f[4], lineno, "cost") : 0;
        if (cap < 0) throw ValidationError("line " + std::to_string(lineno) + ": negative capacity");
        inst.network.add_arc(u, v, cap, cost);
      } else {
        if (f.size() == 5) throw ParseError(lineno, "undirected edges take no cost");
        const auto w = detail::parse_number<double>(f[3], lineno, "weight");
        if (!(w > 0.0) || !std::isfinite(w))
          throw ValidationError("line " + std::to_string(lineno) + ": weight must be positive");
        inst.graph.add_edge(u, v, w);
      }
    } else if (f[0] == "n") {
      if (f.size() != 3) throw ParseError(lineno, "expected 'n <v> <s|t|demand>'");
      const NodeId v = vertex(f[1], lineno);
      if (f[2] == "s" || f[2] == "t") {
        auto& slot = f[2] == "s" ? inst.source : inst.sink;
        if (slot) throw ParseError(lineno, "terminal given twice");
        slot = v;
      } else {
        if (inst.demand.empty()) inst.demand.assign(inst.n, 0);
        if (demand_set[v]) throw ParseError(lineno, "demand given twice");
        demand_set[v] = 1;
        inst.demand[v] = detail::parse_number<std::int64_t>(f[2], lineno, "demand");
      }
    } else if (f[0] == "b") {
      if (inst.kind != ProblemKind::laplacian) throw ParseError(lineno, "'b' lines belong to lap instances");
      if (f.size() != 3) throw ParseError(lineno, "expected 'b <v> <value>'");
      const NodeId v = vertex(f[1], lineno);
      inst.rhs[v] = detail::parse_number<double>(f[2], lineno, "right-hand side");
    } else if (f[0] == "f") {
      if (inst.kind != ProblemKind::round) throw ParseError(lineno, "'f' lines belong to round instances");
      if (f.size() != 3) throw ParseError(lineno, "expected 'f <arc> <value>'");
      const auto k = detail::parse_number<std::int64_t>(f[1], lineno, "arc index");
      if (k < 1 || static_cast<std::size_t>(k) > declared_m) throw ParseError(lineno, "arc index out of range");
      if (flows.size() < declared_m) flows.resize(declared_m);
      if (flows[k - 1]) throw ParseError(lineno, "flow given twice");
      flows[k - 1] = detail::parse_number<double>(f[2], lineno, "flow");
    } else {
      throw ParseError(lineno, "unknown record '" + std::string(f[0]) + "'");
    }
  }

  if (!have_header) throw ParseError(lineno, "missing problem line");
  if (arcs != declared_m)
    throw ParseError(lineno, "declared " + std::to_string(declared_m) + " arcs, found " + std::to_string(arcs));

  const bool terminals = inst.source || inst.sink;
  if (terminals && !(inst.source && inst.sink)) throw ValidationError("both terminals are required");
  if (terminals && *inst.source == *inst.sink) throw ValidationError("source equals sink");
  if (terminals && !inst.demand.empty()) throw ValidationError("give either terminals or demands, not both");
  if (!inst.demand.empty() && std::accumulate(inst.demand.begin(), inst.demand.end(), std::int64_t{0}) != 0)
    throw ValidationError("demands do not sum to zero");
  if (!is_directed(inst.kind) && (terminals || !inst.demand.empty()))
    throw ValidationError("terminals and demands belong to flow instances");

  switch (inst.kind) {
    case ProblemKind::max_flow:
      if (!terminals) throw ValidationError("max flow instances need 'n <v> s' and 'n <v> t'");
      break;
    case ProblemKind::min_cost:
      if (!terminals && inst.demand.empty()) inst.demand.assign(inst.n, 0);
      break;
    case ProblemKind::round: {
      inst.flow.assign(declared_m, 0.0);
      for (std::size_t e = 0; e < flows.size(); ++e) inst.flow[e] = flows[e].value_or(0.0);
      for (EdgeId e = 0; e < declared_m; ++e) {
        const double x = inst.flow[e];
        if (!(x >= 0.0) || x > static_cast<double>(inst.network.arc(e).capacity))
          throw ValidationError("flow on arc " + std::to_string(e + 1) + " outside [0, capacity]");
      }
      break;
    }
    default:
      break;
  }
  return inst;
}

inline Instance parse_instance(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_instance(in);
}

inline void write_instance(std::ostream& out, const Instance& inst) {
  const std::size_t m = is_directed(inst.kind) ? inst.network.num_arcs() : inst.graph.num_edges();
  out << "p " << kind_name(inst.kind) << ' ' << inst.n << ' ' << m << '\n';
  if (inst.source) out << "n " << *inst.source + 1 << " s\n";
  if (inst.sink) out << "n " << *inst.sink + 1 << " t\n";
  for (NodeId v = 0; v < inst.demand.size(); ++v)
    if (inst.demand[v] != 0) out << "n " << v + 1 << ' ' << inst.demand[v] << '\n';
  if (is_directed(inst.kind)) {
    for (const auto& a : inst.network.arcs())
      out << "a " << a.from + 1 << ' ' << a.to + 1 << ' ' << a.capacity << ' ' << a.cost << '\n';
  } else {
    std::ostringstream w;
    w.precision(17);
    for (const auto& e : inst.graph.edges()) {
      w.str("");
      w << e.w;
      out << "a " << e.u + 1 << ' ' << e.v + 1 << ' ' << w.str() << '\n';
    }
  }
  std::ostringstream num;
  num.precision(17);
  for (Eigen::Index v = 0; v < inst.rhs.size(); ++v) {
    if (inst.rhs[v] == 0.0) continue;
    num.str("");
    num << inst.rhs[v];
    out << "b " << v + 1 << ' ' << num.str() << '\n';
  }
  for (std::size_t e = 0; e < inst.flow.size(); ++e) {
    if (inst.flow[e] == 0.0) continue;
    num.str("");
    num << inst.flow[e];
    out << "f " << e + 1 << ' ' << num.str() << '\n';
  }
}

}  // namespace cliqueflow
