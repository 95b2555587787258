#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <cliqueflow/cliqueflow.hpp>

using namespace cliqueflow;

namespace {

constexpr std::size_t kOracleLimit = 40;

struct Settings {
  std::string input;
  double epsilon = 1e-6;
  double r = 1.0;
  std::optional<double> delta;
  std::optional<std::int64_t> target;
  std::optional<std::uint64_t> seed;
  std::size_t size = 12;
  std::string ledger_out;
  std::string instance_out;
  bool verify = false;
  bool quiet = false;
};

enum class Verdict { none, match, mismatch, skipped };

struct Report {
  std::string problem;
  std::vector<std::string> result;    // summary lines
  std::vector<std::string> solution;  // per-vertex or per-arc lines
  Verdict verdict = Verdict::none;
  std::string verdict_detail;
};

std::string fmt(double x) {
  std::ostringstream s;
  s << std::setprecision(12) << x;
  return s.str();
}

// ---------------------------------------------------------------------------
// instance generation under --seed

std::vector<std::int64_t> split_units(std::int64_t total, std::size_t k, gen::Rng& rng) {
  std::vector<std::int64_t> cuts{0, total};
  for (std::size_t i = 1; i < k; ++i) cuts.push_back(gen::uniform_int(rng, 0, total));
  std::ranges::sort(cuts);
  std::vector<std::int64_t> parts;
  for (std::size_t i = 1; i < cuts.size(); ++i) parts.push_back(cuts[i] - cuts[i - 1]);
  return parts;
}

Instance generate(ProblemKind kind, std::size_t n, std::uint64_t seed, std::optional<double> delta) {
  if (n < 2) throw std::invalid_argument("--size must be at least 2");
  gen::Rng rng(seed);
  Instance inst;
  inst.kind = kind;
  inst.n = n;
  inst.network = FlowNetwork(n);
  inst.graph = WeightedGraph(n);
  inst.rhs = Vector::Zero(static_cast<Eigen::Index>(n));
  switch (kind) {
    case ProblemKind::laplacian: {
      inst.graph = gen::connected_graph(n, 2 * n, 100, rng);
      double sum = 0.0;
      for (std::size_t v = 0; v < n; ++v) sum += inst.rhs[v] = static_cast<double>(gen::uniform_int(rng, -10, 10));
      inst.rhs[0] -= sum;
      break;
    }
    case ProblemKind::sparsify:
      inst.graph = gen::connected_graph(n, 3 * n, 8, rng);
      break;
    case ProblemKind::orient:
      inst.graph = gen::eulerian_multigraph(n, 3 * n, rng);
      break;
    case ProblemKind::max_flow: {
      auto d = gen::random_dag(n, 3 * n, 8, rng);
      inst.network = std::move(d.net);
      inst.source = d.s;
      inst.sink = d.t;
      break;
    }
    case ProblemKind::min_cost: {
      auto d = gen::random_unit_mcf(n, 3 * n, 16, 0.3, rng);
      inst.network = std::move(d.net);
      inst.demand = std::move(d.sigma);
      break;
    }
    case ProblemKind::round: {
      auto d = gen::random_dag(n, 3 * n, 6, rng);
      const std::size_t phases = delta ? rounding_phases(*delta) : 4;
      const double step = std::ldexp(1.0, -static_cast<int>(phases));
      const std::size_t k = 3;
      const auto weights = split_units(std::int64_t{1} << phases, k, rng);
      inst.flow.assign(d.net.num_arcs(), 0.0);
      for (std::size_t i = 0; i < k; ++i) {
        const auto f = gen::random_path_flow(d, 2 + i, rng);
        for (std::size_t e = 0; e < f.size(); ++e)
          inst.flow[e] += static_cast<double>(weights[i]) * step * static_cast<double>(f[e]);
      }
      inst.network = std::move(d.net);
      inst.source = d.s;
      inst.sink = d.t;
      break;
    }
  }
  return inst;
}

Instance load(const Settings& s, ProblemKind kind) {
  if (!s.input.empty()) {
    std::ifstream in(s.input);
    if (!in) throw std::runtime_error("cannot open " + s.input);
    return parse_instance(in);
  }
  if (!s.seed) throw std::invalid_argument("give an instance file or --seed to generate one");
  return generate(kind, s.size, *s.seed, s.delta);
}

void require_kind(const Instance& inst, std::initializer_list<ProblemKind> allowed, const std::string& cmd) {
  for (auto k : allowed)
    if (inst.kind == k) return;
  throw ValidationError(cmd + " does not accept '" + std::string(kind_name(inst.kind)) + "' instances");
}

// capacity-k arcs become k parallel unit arcs; returns the original arc of each copy
std::pair<FlowNetwork, std::vector<EdgeId>> unit_split(const FlowNetwork& g) {
  FlowNetwork out(g.num_vertices());
  std::vector<EdgeId> origin;
  for (EdgeId e = 0; e < g.num_arcs(); ++e) {
    const auto& a = g.arc(e);
    for (std::int64_t k = 0; k < a.capacity; ++k) {
      out.add_arc(a.from, a.to, 1, a.cost);
      origin.push_back(e);
    }
  }
  return {std::move(out), std::move(origin)};
}

bool capacity_feasible(const FlowNetwork& g, std::span<const std::int64_t> f) {
  if (f.size() != g.num_arcs()) return false;
  for (EdgeId e = 0; e < g.num_arcs(); ++e)
    if (f[e] < 0 || f[e] > g.arc(e).capacity) return false;
  return true;
}

bool routes(const FlowNetwork& g, std::span<const std::int64_t> f, std::span<const std::int64_t> sigma) {
  for (double r : residue<std::int64_t>(g, f, sigma))
    if (r != 0.0) return false;
  return true;
}

bool conserves_except(const FlowNetwork& g, std::span<const std::int64_t> f, NodeId s, NodeId t) {
  const auto r = residue<std::int64_t>(g, f);
  for (NodeId v = 0; v < g.num_vertices(); ++v)
    if (v != s && v != t && r[v] != 0.0) return false;
  return true;
}

void set_verdict(Report& rep, bool ok, std::string detail) {
  rep.verdict = ok ? Verdict::match : Verdict::mismatch;
  rep.verdict_detail = std::move(detail);
}

void arc_lines(Report& rep, std::span<const std::int64_t> f) {
  for (std::size_t e = 0; e < f.size(); ++e) rep.solution.push_back("f " + std::to_string(e + 1) + " " + std::to_string(f[e]));
}

// ---------------------------------------------------------------------------
// subcommands

Report run_solve_laplacian(const Settings& s, RoundLedger& ledger) {
  const auto inst = load(s, ProblemKind::laplacian);
  require_kind(inst, {ProblemKind::laplacian}, "solve-laplacian");
  DistributedSolveOptions opt;
  opt.r = s.r;
  const auto sol = solve_distributed(inst.graph, inst.rhs, s.epsilon, ledger, opt);
  Report rep;
  rep.problem = "solve-laplacian";
  rep.result.push_back("epsilon: " + fmt(s.epsilon));
  rep.result.push_back("iterations: " + std::to_string(sol.report.iterations));
  rep.result.push_back("preconditioner-alpha: " + fmt(sol.report.alpha));
  for (Eigen::Index v = 0; v < sol.y.size(); ++v) rep.solution.push_back("x " + std::to_string(v + 1) + " " + fmt(sol.y[v]));
  if (s.verify) {
    if (inst.n > kOracleLimit) {
      rep.verdict = Verdict::skipped;
    } else {
      const Eigen::MatrixXd L = laplacian(inst.graph);
      const auto exact = pseudo_solve_oracle(L, inst.rhs);
      const Vector diff = sol.y - exact.x;
      const double err = std::sqrt(std::max(0.0, diff.dot(L * diff)));
      const double scale = std::sqrt(std::max(0.0, exact.x.dot(L * exact.x)));
      set_verdict(rep, err <= s.epsilon * scale,
                  "L-norm error " + fmt(err) + ", bound " + fmt(s.epsilon * scale));
    }
  }
  return rep;
}

Report run_sparsify(const Settings& s, RoundLedger& ledger) {
  const auto inst = load(s, ProblemKind::sparsify);
  require_kind(inst, {ProblemKind::sparsify, ProblemKind::laplacian, ProblemKind::orient}, "sparsify");
  const auto sp = spectral_sparsify(inst.graph, s.r, ledger);
  Report rep;
  rep.problem = "sparsify";
  rep.result.push_back("edges-in: " + std::to_string(inst.graph.num_edges()));
  rep.result.push_back("edges-out: " + std::to_string(sp.h.num_edges()));
  rep.result.push_back("alpha: " + fmt(sp.alpha));
  for (const auto& e : sp.h.edges())
    rep.solution.push_back("a " + std::to_string(e.u + 1) + " " + std::to_string(e.v + 1) + " " + fmt(e.w));
  if (s.verify) {
    if (inst.n > kOracleLimit) {
      rep.verdict = Verdict::skipped;
    } else {
      const auto range = relative_spectrum(inst.graph, sp.h);
      set_verdict(rep, check_sparsifier(inst.graph, sp.h, sp.alpha),
                  "relative spectrum [" + fmt(range.lo) + ", " + fmt(range.hi) + "]");
    }
  }
  return rep;
}

Report run_orient(const Settings& s, RoundLedger& ledger) {
  const auto inst = load(s, ProblemKind::orient);
  require_kind(inst, {ProblemKind::orient, ProblemKind::sparsify, ProblemKind::laplacian}, "orient");
  const auto res = orient(inst.graph, ledger);
  Report rep;
  rep.problem = "orient";
  rep.result.push_back("edges: " + std::to_string(inst.graph.num_edges()));
  rep.result.push_back("iterations: " + std::to_string(res.stats.iterations));
  for (EdgeId e = 0; e < inst.graph.num_edges(); ++e)
    rep.solution.push_back("o " + std::to_string(e + 1) + " " + std::to_string(res.orientation.tail(inst.graph, e) + 1) +
                           " " + std::to_string(res.orientation.head(inst.graph, e) + 1));
  if (s.verify) set_verdict(rep, is_balanced(inst.graph, res.orientation), "in-degree equals out-degree everywhere");
  return rep;
}

double infer_delta(std::span<const double> flow) {
  for (int k = 0; k <= 30; ++k) {
    const double scale = std::ldexp(1.0, k);
    bool ok = true;
    for (double x : flow) ok = ok && std::floor(x * scale) == x * scale;
    if (ok) return std::ldexp(1.0, -k);
  }
  throw ValidationError("flow values are not dyadic; pass --delta");
}

Report run_round_flow(const Settings& s, RoundLedger& ledger) {
  const auto inst = load(s, ProblemKind::round);
  require_kind(inst, {ProblemKind::round}, "round-flow");
  const double delta = s.delta ? *s.delta : infer_delta(inst.flow);
  std::optional<Terminals> term;
  if (inst.source) term = Terminals{*inst.source, *inst.sink};
  bool costs = false;
  for (const auto& a : inst.network.arcs()) costs = costs || a.cost != 0;
  const auto res = flow_round({&inst.network, inst.flow, delta, term, costs}, ledger);

  Report rep;
  rep.problem = "round-flow";
  rep.result.push_back("delta: " + fmt(delta));
  rep.result.push_back("orientation-calls: " + std::to_string(res.orient_calls));
  const double cost_in = flow_cost<double>(inst.network, inst.flow);
  const double cost_out = flow_cost<std::int64_t>(inst.network, res.flow);
  rep.result.push_back("cost-in: " + fmt(cost_in));
  rep.result.push_back("cost-out: " + fmt(cost_out));
  if (term) {
    rep.result.push_back("value-in: " + fmt(flow_value<double>(inst.network, inst.flow, term->s)));
    rep.result.push_back("value-out: " + std::to_string(flow_value<std::int64_t>(inst.network, res.flow, term->s)));
  }
  arc_lines(rep, res.flow);
  if (s.verify) {
    bool ok = capacity_feasible(inst.network, res.flow);
    for (EdgeId e = 0; e < inst.network.num_arcs(); ++e)
      ok = ok && std::abs(static_cast<double>(res.flow[e]) - inst.flow[e]) < 1.0;
    const auto r_in = residue<double>(inst.network, inst.flow);
    const auto r_out = residue<std::int64_t>(inst.network, res.flow);
    for (NodeId v = 0; v < inst.n; ++v) {
      const bool terminal = term && (v == term->s || v == term->t);
      if (!terminal) ok = ok && r_out[v] == r_in[v];
    }
    double value_in = 0.0;
    if (term) {
      value_in = flow_value<double>(inst.network, inst.flow, term->s);
      ok = ok && conserves_except(inst.network, res.flow, term->s, term->t) &&
           static_cast<double>(flow_value<std::int64_t>(inst.network, res.flow, term->s)) >= value_in - 1e-9;
    }
    const bool integral_total = !term || std::floor(value_in) == value_in;
    if (costs && integral_total) ok = ok && cost_out <= cost_in + 1e-9;
    set_verdict(rep, ok, "integral, within one unit per arc, demands kept");
  }
  return rep;
}

Report run_max_flow(const Settings& s, RoundLedger& ledger) {
  const auto inst = load(s, ProblemKind::max_flow);
  require_kind(inst, {ProblemKind::max_flow}, "max-flow");
  const NodeId src = *inst.source, snk = *inst.sink;
  const auto res = s.target ? max_flow(inst.network, src, snk, *s.target, ledger)
                            : max_flow_value(inst.network, src, snk, ledger);
  Report rep;
  rep.problem = "max-flow";
  rep.result.push_back("value: " + std::to_string(res.value));
  rep.result.push_back("ipm-iterations: " + std::to_string(res.stats.iterations));
  rep.result.push_back("augmenting-paths: " + std::to_string(res.stats.augmenting_paths));
  arc_lines(rep, res.flow);
  if (s.verify) {
    if (inst.n > kOracleLimit) {
      rep.verdict = Verdict::skipped;
    } else {
      const auto ref = oracle::max_flow(inst.network, src, snk);
      const bool feasible = capacity_feasible(inst.network, res.flow) &&
                            conserves_except(inst.network, res.flow, src, snk) &&
                            flow_value<std::int64_t>(inst.network, res.flow, src) == res.value;
      const std::int64_t expected = s.target ? *s.target : ref.value;
      set_verdict(rep, feasible && res.value == expected && expected <= ref.value,
                  "oracle max flow " + std::to_string(ref.value));
    }
  }
  return rep;
}

Report run_min_cost_flow(const Settings& s, RoundLedger& ledger) {
  const auto inst = load(s, ProblemKind::min_cost);
  require_kind(inst, {ProblemKind::min_cost, ProblemKind::max_flow}, "min-cost-flow");
  const auto [unit, origin] = unit_split(inst.network);
  const auto res = inst.source ? min_cost_max_st_flow(unit, *inst.source, *inst.sink, ledger)
                               : min_cost_flow(unit, inst.demand, ledger);
  std::vector<std::int64_t> flow(inst.network.num_arcs(), 0);
  for (std::size_t k = 0; k < origin.size(); ++k) flow[origin[k]] += res.flow[k];

  Report rep;
  rep.problem = "min-cost-flow";
  rep.result.push_back("cost: " + std::to_string(res.cost));
  if (inst.source) rep.result.push_back("value: " + std::to_string(flow_value<std::int64_t>(inst.network, flow, *inst.source)));
  rep.result.push_back("progress-steps: " + std::to_string(res.stats.progress_steps));
  rep.result.push_back("perturbations: " + std::to_string(res.stats.perturbations));
  arc_lines(rep, flow);
  if (s.verify) {
    if (inst.n > kOracleLimit) {
      rep.verdict = Verdict::skipped;
    } else if (inst.source) {
      const auto ref = oracle::min_cost_max_flow(inst.network, *inst.source, *inst.sink);
      const bool ok = capacity_feasible(inst.network, flow) &&
                      conserves_except(inst.network, flow, *inst.source, *inst.sink) &&
                      flow_value<std::int64_t>(inst.network, flow, *inst.source) == ref.value &&
                      flow_cost<std::int64_t>(inst.network, flow) == static_cast<double>(ref.cost);
      set_verdict(rep, ok, "oracle value " + std::to_string(ref.value) + ", cost " + std::to_string(ref.cost));
    } else {
      const auto ref = oracle::min_cost_flow(inst.network, inst.demand);
      const bool ok = capacity_feasible(inst.network, flow) && routes(inst.network, flow, inst.demand) &&
                      flow_cost<std::int64_t>(inst.network, flow) == static_cast<double>(ref.cost) &&
                      res.cost == ref.cost;
      set_verdict(rep, ok, "oracle cost " + std::to_string(ref.cost));
    }
  }
  return rep;
}

void print(const Report& rep, const RoundLedger& ledger, bool quiet) {
  std::cout << "problem: " << rep.problem << '\n';
  for (const auto& line : rep.result) std::cout << line << '\n';
  std::cout << "rounds: " << ledger.rounds_charged() << '\n';
  for (const auto& [phase, r] : ledger.per_phase()) std::cout << "  " << phase << ' ' << r << '\n';
  switch (rep.verdict) {
    case Verdict::none: break;
    case Verdict::match: std::cout << "verify: MATCH (" << rep.verdict_detail << ")\n"; break;
    case Verdict::mismatch: std::cout << "verify: MISMATCH (" << rep.verdict_detail << ")\n"; break;
    case Verdict::skipped: std::cout << "verify: SKIPPED (more than " << kOracleLimit << " vertices)\n"; break;
  }
  if (!quiet)
    for (const auto& line : rep.solution) std::cout << line << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Congested-clique flow and Laplacian solvers on a round-counting simulator"};
  app.require_subcommand(1);
  Settings s;
  using Runner = Report (*)(const Settings&, RoundLedger&);
  Runner runner = nullptr;
  ProblemKind gen_kind = ProblemKind::max_flow;

  auto add = [&](const std::string& name, const std::string& help, Runner fn, ProblemKind kind) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("input", s.input, "instance file");
    sub->add_option("--epsilon", s.epsilon, "solver tolerance")->check(CLI::Range(1e-15, 0.5));
    sub->add_option("--r", s.r, "sparsifier trade-off parameter")->check(CLI::Range(1.0, 64.0));
    sub->add_option("--delta", s.delta, "rounding granularity, a power of two");
    sub->add_option("--target-F", s.target, "required flow value");
    sub->add_option("--seed", s.seed, "generate a random instance with this seed");
    sub->add_option("--size", s.size, "vertex count of generated instances");
    sub->add_option("--ledger-out", s.ledger_out, "write phase<TAB>rounds lines here");
    sub->add_option("--instance-out", s.instance_out, "write the (generated) instance here");
    sub->add_flag("--verify", s.verify, "compare against an exact oracle");
    sub->add_flag("--quiet", s.quiet, "omit per-vertex and per-arc output");
    sub->callback([&, fn, kind] {
      runner = fn;
      gen_kind = kind;
    });
  };
  add("solve-laplacian", "solve L x = b", run_solve_laplacian, ProblemKind::laplacian);
  add("sparsify", "spectral sparsifier", run_sparsify, ProblemKind::sparsify);
  add("orient", "Eulerian orientation", run_orient, ProblemKind::orient);
  add("round-flow", "round a fractional flow", run_round_flow, ProblemKind::round);
  add("max-flow", "maximum s-t flow", run_max_flow, ProblemKind::max_flow);
  add("min-cost-flow", "minimum cost flow", run_min_cost_flow, ProblemKind::min_cost);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (!s.instance_out.empty()) {
      const auto inst = s.input.empty() ? generate(gen_kind, s.size, s.seed.value_or(0), s.delta) : [&] {
        std::ifstream in(s.input);
        return parse_instance(in);
      }();
      std::ofstream out(s.instance_out);
      write_instance(out, inst);
      if (!out) throw std::runtime_error("cannot write " + s.instance_out);
    }
    RoundLedger ledger;
    const auto start = std::chrono::steady_clock::now();
    const Report rep = runner(s, ledger);
    const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;
    print(rep, ledger, s.quiet);
    // wall-clock goes to stderr so stdout stays reproducible
    std::cerr << "wall-clock: " << fmt(wall.count()) << " s\n";
    if (!s.ledger_out.empty()) {
      std::ofstream out(s.ledger_out, std::ios::binary);
      out << ledger.to_tsv();
      if (!out) throw std::runtime_error("cannot write " + s.ledger_out);
    }
    return rep.verdict == Verdict::mismatch ? 2 : 0;
  } catch (const Infeasible& e) {
    std::cout << "infeasible: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
