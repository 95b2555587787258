#pragma once

// Deterministic Eulerian orientation by ring contraction.
//
// Every vertex pairs up its incident edges; each pair is a token and the
// tokens form edge-disjoint rings. Per iteration the rings are 3-coloured
// (Cole-Vishkin on two id-ordered forests), a maximal matching is built from
// the colouring, the higher id of every matched pair survives and the others
// splice themselves out. After ceil(log2 n) iterations one survivor per ring
// picks the cheaper traversal direction, and the direction is pushed back
// through the spliced tokens in reverse iteration order.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "clique_sim.hpp"
#include "errors.hpp"
#include "graph.hpp"

namespace cliqueflow {

using TokenId = std::uint32_t;
inline constexpr TokenId kNoToken = std::numeric_limits<TokenId>::max();

// pairs[v] lists the edge pairs formed at v, in increasing order of edge id
struct CyclePairing {
  std::vector<std::vector<std::pair<EdgeId, EdgeId>>> pairs;
};

inline CyclePairing pair_locally(const WeightedGraph& g) {
  auto inc = g.incidence();
  CyclePairing p;
  p.pairs.resize(g.num_vertices());
  for (NodeId v = 0; v < g.num_vertices(); ++v) {
    if (inc[v].size() % 2 != 0) throw OddDegree(v);
    std::ranges::sort(inc[v]);
    for (std::size_t i = 0; i < inc[v].size(); i += 2) p.pairs[v].emplace_back(inc[v][i], inc[v][i + 1]);
  }
  return p;
}

struct Orientation {
  std::vector<std::uint8_t> reversed;  // 1: edge (u, v) is oriented v -> u

  NodeId tail(const WeightedGraph& g, EdgeId e) const { return reversed[e] ? g.edge(e).v : g.edge(e).u; }
  NodeId head(const WeightedGraph& g, EdgeId e) const { return reversed[e] ? g.edge(e).u : g.edge(e).v; }
};

inline bool is_balanced(const WeightedGraph& g, const Orientation& o) {
  if (o.reversed.size() != g.num_edges()) return false;
  std::vector<std::int64_t> bal(g.num_vertices(), 0);
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    ++bal[o.tail(g, e)];
    --bal[o.head(g, e)];
  }
  return std::ranges::all_of(bal, [](std::int64_t b) { return b == 0; });
}

inline std::size_t ceil_log2(std::size_t n) { return n <= 1 ? 0 : static_cast<std::size_t>(std::bit_width(n - 1)); }

// number of times log2 must be applied before the value drops to <= 1
inline std::size_t log_star(double x) {
  std::size_t k = 0;
  while (x > 1.0) {
    x = std::log2(x);
    ++k;
  }
  return k;
}

// Cole-Vishkin steps needed to bring `tokens` distinct ids down to 6 colours.
inline std::size_t cole_vishkin_steps(std::size_t tokens) {
  std::size_t k = tokens, steps = 0;
  while (k > 6) {
    k = 2 * static_cast<std::size_t>(std::bit_width(k - 1));
    ++steps;
  }
  return steps;
}

struct RingRecord {
  TokenId leader = kNoToken;
  std::size_t survivors = 0;
  std::int64_t chosen_cost = 0;   // signed cost of the chosen traversal direction
  std::int64_t reverse_cost = 0;  // the other direction
};

struct OrientStats {
  std::size_t tokens = 0;
  std::size_t iterations = 0;
  std::size_t exchanges = 0;
  std::size_t colouring_steps = 0;       // Cole-Vishkin steps per colouring
  std::vector<std::size_t> largest_ring;  // before iteration i; the final entry is after the last one
  bool halving_held = true;
  std::size_t max_splice_hops = 0;
  std::size_t leader_exchanges = 0;
  std::vector<RingRecord> rings;
};

struct OrientResult {
  Orientation orientation;
  OrientStats stats;
};

namespace detail {

struct TokenMessage {
  TokenId from = 0;
  TokenId to = 0;
  std::uint8_t side = 0;  // receiving side at `to`
  std::array<Word, 3> data{};
};

struct TokenDelivery {
  std::uint8_t side = 0;
  std::array<Word, 3> data{};

  friend auto operator<=>(const TokenDelivery&, const TokenDelivery&) = default;
};

// Messages between tokens. Same-host messages are local; the rest is routed
// through the clique, split into batches that respect the routing bound.
class TokenNetwork {
 public:
  TokenNetwork(std::size_t n, std::vector<NodeId> hosts, RoundLedger& ledger)
      : net_(std::max<std::size_t>(n, 1), ledger), hosts_(std::move(hosts)) {}

  CliqueNetwork<>& net() noexcept { return net_; }
  NodeId host(TokenId t) const { return hosts_[t]; }
  std::size_t exchanges() const noexcept { return exchanges_; }

  std::vector<std::vector<TokenDelivery>> exchange(const std::vector<TokenMessage>& msgs) {
    std::vector<std::vector<TokenDelivery>> in(hosts_.size());
    std::vector<Message> wire;
    for (const auto& m : msgs) {
      if (hosts_[m.from] == hosts_[m.to]) {
        in[m.to].push_back({m.side, m.data});
      } else {
        wire.push_back(Message{hosts_[m.from], hosts_[m.to],
                               Payload{static_cast<Word>(m.to) * 2 + m.side, m.data[0], m.data[1], m.data[2]}});
      }
    }
    std::vector<std::vector<Message>> delivered;
    route_in_batches(net_, std::move(wire), delivered);
    for (const auto& box : delivered) {
      for (const auto& msg : box) {
        const auto to = static_cast<TokenId>(msg.payload[0] / 2);
        in[to].push_back({static_cast<std::uint8_t>(msg.payload[0] % 2), {msg.payload[1], msg.payload[2], msg.payload[3]}});
      }
    }
    for (auto& box : in) std::ranges::sort(box);
    ++exchanges_;
    return in;
  }

 private:
  CliqueNetwork<> net_;
  std::vector<NodeId> hosts_;
  std::size_t exchanges_ = 0;
};

}  // namespace detail

class EulerProtocol {
 public:
  struct Link {
    TokenId token = kNoToken;
    std::uint8_t side = 0;  // side of `token` this link arrives at
  };

  struct Token {
    NodeId host = 0;
    std::array<EdgeId, 2> edge{};
    std::array<Link, 2> nb{};
    std::array<std::int64_t, 2> acc{};  // cost of walking from here out of side s to nb[s]
    bool active = true;
    int out = -1;  // side the traversal leaves through
    int died_at = -1;
    std::array<std::size_t, 2> hops{};  // distance to the surviving token on each side, once spliced out
    std::vector<std::array<Link, 2>> history;  // neighbours at the start of every iteration
    std::vector<std::uint8_t> contracted;      // whether the ring contracted in that iteration
  };

  EulerProtocol(const WeightedGraph& g, RoundLedger& ledger, std::span<const std::int64_t> costs = {})
      : g_(g), tn_(g.num_vertices(), {}, ledger) {
    if (!costs.empty() && costs.size() != g.num_edges()) throw DimensionMismatch("cost vector does not match edges");
    const auto pairing = pair_locally(g);
    std::vector<NodeId> hosts;
    std::vector<std::array<std::pair<TokenId, std::uint8_t>, 2>> slot(g.num_edges());
    for (NodeId v = 0; v < g.num_vertices(); ++v) {
      for (const auto& [a, b] : pairing.pairs[v]) {
        const auto id = static_cast<TokenId>(tokens_.size());
        Token t;
        t.host = v;
        t.edge = {a, b};
        for (std::uint8_t s = 0; s < 2; ++s) {
          const auto& e = g.edge(t.edge[s]);
          const std::int64_t c = costs.empty() ? 0 : costs[t.edge[s]];
          t.acc[s] = e.u == v ? c : -c;
          slot[t.edge[s]][e.u == v ? 0 : 1] = {id, s};
        }
        tokens_.push_back(std::move(t));
        hosts.push_back(v);
      }
    }
    tn_ = detail::TokenNetwork(g.num_vertices(), std::move(hosts), ledger);
    stats_.tokens = tokens_.size();
    stats_.colouring_steps = cole_vishkin_steps(tokens_.size());

    // neighbour discovery: the token count is broadcast, then every token
    // tells the far endpoint of each of its edges who it is
    auto& net = tn_.net();
    PhaseScope scope(net, "euler:setup");
    net.ledger().charge(net.phase(), 1);
    std::vector<Message> wire;
    for (TokenId id = 0; id < tokens_.size(); ++id) {
      for (std::uint8_t s = 0; s < 2; ++s) {
        const auto& e = g.edge(tokens_[id].edge[s]);
        wire.push_back(Message{tokens_[id].host, e.other(tokens_[id].host),
                               Payload{tokens_[id].edge[s], static_cast<Word>(id) * 2 + s}});
      }
    }
    std::vector<std::vector<Message>> delivered;
    route_in_batches(net, std::move(wire), delivered);
    for (NodeId v = 0; v < delivered.size(); ++v) {
      for (const auto& msg : delivered[v]) {
        const auto e = static_cast<EdgeId>(msg.payload[0]);
        const auto [mine, side] = slot[e][g.edge(e).u == v ? 0 : 1];
        tokens_[mine].nb[side] = Link{static_cast<TokenId>(msg.payload[1] / 2), static_cast<std::uint8_t>(msg.payload[1] % 2)};
      }
    }
  }

  std::size_t num_tokens() const noexcept { return tokens_.size(); }
  const Token& token(TokenId t) const { return tokens_.at(t); }
  const OrientStats& stats() const noexcept { return stats_; }
  std::size_t iterations() const noexcept { return iteration_; }

  // active tokens of the ring through t (bookkeeping only, not part of the protocol)
  std::size_t ring_size(TokenId t) const {
    std::size_t k = 0;
    TokenId at = t;
    int out = 0;
    do {
      const auto link = tokens_[at].nb[out];
      at = link.token;
      out = 1 - link.side;
      ++k;
    } while (at != t || out != 0);
    return k;
  }

  std::size_t largest_ring() const {
    std::size_t best = 0;
    for (TokenId t = 0; t < tokens_.size(); ++t)
      if (tokens_[t].active) best = std::max(best, ring_size(t));
    return best;
  }

  // Proper 3-colouring of every ring with at least three active tokens;
  // -1 for tokens that do not take part.
  std::vector<int> color3() {
    PhaseScope scope(tn_.net(), "euler:color");
    const auto n_tok = static_cast<TokenId>(tokens_.size());
    std::vector<std::array<std::uint64_t, 2>> fc(n_tok);
    for (TokenId t = 0; t < n_tok; ++t) fc[t] = {t, t};
    auto parent = [&](TokenId t, int k) { return tokens_[t].nb[k].token > t; };
    auto share = [&] {
      std::vector<detail::TokenMessage> msgs;
      for (TokenId t = 0; t < n_tok; ++t) {
        if (!contracting(t)) continue;
        for (std::uint8_t s = 0; s < 2; ++s)
          msgs.push_back({t, tokens_[t].nb[s].token, tokens_[t].nb[s].side, {fc[t][0], fc[t][1], 0}});
      }
      return tn_.exchange(msgs);
    };
    // colour of the parent in forest k, read off the message that came in on side k
    auto from_side = [](const std::vector<detail::TokenDelivery>& box, int k) {
      for (const auto& d : box)
        if (d.side == k) return d.data[k];
      throw std::logic_error("missing ring neighbour message");
    };

    for (std::size_t step = 0; step < stats_.colouring_steps; ++step) {
      auto in = share();
      for (TokenId t = 0; t < n_tok; ++t) {
        if (!contracting(t)) continue;
        for (int k = 0; k < 2; ++k) {
          const std::uint64_t c = fc[t][k];
          if (parent(t, k)) {
            const std::uint64_t cp = from_side(in[t], k);
            const auto i = static_cast<std::uint64_t>(std::countr_zero(c ^ cp));
            fc[t][k] = 2 * i + ((c >> i) & 1);
          } else {
            fc[t][k] = c & 1;
          }
        }
      }
    }

    // per forest: shift colours down one level, then recolour x in {5, 4, 3}
    for (std::uint64_t x = 5; x >= 3; --x) {
      std::vector<std::array<std::uint64_t, 2>> before = fc;
      auto in = share();
      for (TokenId t = 0; t < n_tok; ++t) {
        if (!contracting(t)) continue;
        for (int k = 0; k < 2; ++k)
          fc[t][k] = parent(t, k) ? from_side(in[t], k) : (before[t][k] == 0 ? 1 : 0);
      }
      in = share();
      for (TokenId t = 0; t < n_tok; ++t) {
        if (!contracting(t)) continue;
        for (int k = 0; k < 2; ++k) {
          if (fc[t][k] != x) continue;
          const std::uint64_t above = parent(t, k) ? from_side(in[t], k) : 99;
          std::uint64_t c = 0;
          while (c == above || c == before[t][k]) ++c;
          fc[t][k] = c;
        }
      }
    }

    std::vector<int> colour(n_tok, -1);
    for (TokenId t = 0; t < n_tok; ++t)
      if (contracting(t)) colour[t] = static_cast<int>(3 * fc[t][0] + fc[t][1]);
    for (int x = 8; x >= 3; --x) {
      std::vector<detail::TokenMessage> msgs;
      for (TokenId t = 0; t < n_tok; ++t) {
        if (!contracting(t)) continue;
        for (std::uint8_t s = 0; s < 2; ++s)
          msgs.push_back({t, tokens_[t].nb[s].token, tokens_[t].nb[s].side, {static_cast<Word>(colour[t]), 0, 0}});
      }
      auto in = tn_.exchange(msgs);
      for (TokenId t = 0; t < n_tok; ++t) {
        if (colour[t] != x) continue;
        int c = 0;
        auto used = [&](int col) {
          return std::ranges::any_of(in[t], [&](const auto& d) { return static_cast<int>(d.data[0]) == col; });
        };
        while (used(c)) ++c;
        colour[t] = c;
      }
    }
    return colour;
  }

  // One contraction iteration: colour, match, splice.
  void contract_once() {
    const auto n_tok = static_cast<TokenId>(tokens_.size());
    std::vector<std::size_t> before_size(n_tok, 0);
    for (TokenId t = 0; t < n_tok; ++t) {
      if (!tokens_[t].active) continue;
      tokens_[t].history.push_back(tokens_[t].nb);
      tokens_[t].contracted.push_back(contracting(t) ? 1 : 0);
      before_size[t] = ring_size(t);
    }
    if (stats_.largest_ring.empty()) stats_.largest_ring.push_back(largest_ring());

    const auto colour = color3();
    const auto marked = match_and_mark(colour);
    splice(marked);

    for (TokenId t = 0; t < n_tok; ++t) {
      if (!tokens_[t].active || before_size[t] <= 2) continue;
      if (ring_size(t) > (before_size[t] + 1) / 2) stats_.halving_held = false;
    }
    stats_.largest_ring.push_back(largest_ring());
    ++iteration_;
    stats_.iterations = iteration_;
  }

  // Survivors circulate their ids and costs; the largest id on a ring fixes
  // the direction with the smaller signed cost.
  void elect_and_direct() {
    PhaseScope scope(tn_.net(), "euler:leader");
    const auto n_tok = static_cast<TokenId>(tokens_.size());
    std::vector<TokenId> best(n_tok, kNoToken);
    std::vector<int> best_side(n_tok, -1);
    std::vector<std::int64_t> total(n_tok, 0);
    std::vector<detail::TokenMessage> flight;
    for (TokenId t = 0; t < n_tok; ++t) {
      if (!tokens_[t].active) continue;
      best[t] = t;
      flight.push_back({t, tokens_[t].nb[0].token, tokens_[t].nb[0].side, {t, to_word(tokens_[t].acc[0]), 0}});
    }
    while (!flight.empty()) {
      auto in = tn_.exchange(flight);
      ++stats_.leader_exchanges;
      flight.clear();
      for (TokenId t = 0; t < n_tok; ++t) {
        for (const auto& d : in[t]) {
          const auto origin = static_cast<TokenId>(d.data[0]);
          const std::int64_t acc = word_to_int(d.data[1]);
          if (origin == t) {
            total[t] = acc;
            continue;
          }
          if (origin > best[t]) {
            best[t] = origin;
            best_side[t] = d.side;
          }
          const int fwd = 1 - d.side;
          flight.push_back({t, tokens_[t].nb[fwd].token, tokens_[t].nb[fwd].side,
                            {origin, to_word(acc + tokens_[t].acc[fwd]), 0}});
        }
      }
    }
    std::vector<std::size_t> survivors(n_tok, 0);
    for (TokenId t = 0; t < n_tok; ++t)
      if (tokens_[t].active) ++survivors[best[t]];
    for (TokenId t = 0; t < n_tok; ++t) {
      if (!tokens_[t].active) continue;
      // leader's side-0 direction leaves this token through 1 - best_side
      const bool leader = best[t] == t;
      const int along = leader ? 0 : 1 - best_side[t];
      const std::int64_t leader_cost = along == 0 ? total[t] : -total[t];
      const bool keep = leader_cost <= 0;
      tokens_[t].out = keep ? along : 1 - along;
      if (leader) {
        const std::int64_t chosen = keep ? leader_cost : -leader_cost;
        stats_.rings.push_back({t, survivors[t], chosen, -chosen});
      }
    }
  }

  // Spliced tokens learn their direction from the survivors that replaced them.
  void reverse() {
    PhaseScope scope(tn_.net(), "euler:reverse");
    const auto n_tok = static_cast<TokenId>(tokens_.size());
    for (std::size_t it = iteration_; it-- > 0;) {
      std::vector<detail::TokenMessage> flight;
      for (TokenId t = 0; t < n_tok; ++t) {
        const auto& tk = tokens_[t];
        if (tk.history.size() <= it || !tk.contracted[it] || (tk.died_at >= 0 && static_cast<std::size_t>(tk.died_at) <= it))
          continue;
        for (std::uint8_t s = 0; s < 2; ++s) {
          const auto link = tk.history[it][s];
          flight.push_back({t, link.token, link.side, {tk.out == s ? 1u : 0u, 1, 0}});
        }
      }
      for (int hop = 1; hop <= 3; ++hop) {
        auto in = tn_.exchange(flight);
        flight.clear();
        for (TokenId t = 0; t < n_tok; ++t) {
          auto& tk = tokens_[t];
          for (const auto& d : in[t]) {
            const int f = d.side;
            const int want = d.data[0] ? 1 - f : f;
            if (tk.died_at != static_cast<int>(it)) {
              if (tk.out != want) throw std::logic_error("neighbouring survivors disagree on direction");
              continue;
            }
            if (tk.out < 0) tk.out = want;
            else if (tk.out != want) throw std::logic_error("segment received conflicting directions");
            const int fwd = 1 - f;
            if (tk.hops[fwd] > 1) {
              const auto link = tk.history[it][fwd];
              flight.push_back({t, link.token, link.side, {tk.out == fwd ? 1u : 0u, static_cast<Word>(hop + 1), 0}});
            }
          }
        }
        if (hop == 3 && !flight.empty()) throw std::logic_error("direction needs more than three hops");
      }
    }
  }

  Orientation orientation() const {
    Orientation o;
    o.reversed.assign(g_.num_edges(), 0);
    std::vector<std::int8_t> set(g_.num_edges(), -1);
    for (const auto& tk : tokens_) {
      if (tk.out < 0) throw std::logic_error("token without direction");
      for (int s = 0; s < 2; ++s) {
        const auto& e = g_.edge(tk.edge[s]);
        const bool leaving = s == tk.out;
        const NodeId tail = leaving ? tk.host : e.other(tk.host);
        const std::int8_t rev = tail == e.u ? 0 : 1;
        auto& slot = set[tk.edge[s]];
        if (slot >= 0 && slot != rev) throw std::logic_error("endpoints disagree on an edge direction");
        slot = rev;
        o.reversed[tk.edge[s]] = static_cast<std::uint8_t>(rev);
      }
    }
    return o;
  }

  std::size_t exchanges() const noexcept { return tn_.exchanges(); }

 private:
  bool contracting(TokenId t) const {
    const auto& tk = tokens_[t];
    return tk.active && tk.nb[0].token != t && tk.nb[0].token != tk.nb[1].token;
  }

  std::vector<std::uint8_t> match_and_mark(const std::vector<int>& colour) {
    PhaseScope scope(tn_.net(), "euler:match");
    const auto n_tok = static_cast<TokenId>(tokens_.size());
    std::vector<std::uint8_t> matched(n_tok, 0);
    std::vector<int> partner(n_tok, -1), proposed(n_tok, -1);
    std::vector<std::array<std::uint8_t, 2>> nb_matched(n_tok, {0, 0});

    auto broadcast_status = [&] {
      std::vector<detail::TokenMessage> msgs;
      for (TokenId t = 0; t < n_tok; ++t) {
        if (!contracting(t)) continue;
        for (std::uint8_t s = 0; s < 2; ++s)
          msgs.push_back({t, tokens_[t].nb[s].token, tokens_[t].nb[s].side, {matched[t], 0, 0}});
      }
      auto in = tn_.exchange(msgs);
      for (TokenId t = 0; t < n_tok; ++t)
        for (const auto& d : in[t]) nb_matched[t][d.side] = static_cast<std::uint8_t>(d.data[0]);
    };
    auto propose = [&](int c, bool second) {
      std::vector<detail::TokenMessage> msgs;
      for (TokenId t = 0; t < n_tok; ++t) {
        if (colour[t] != c || matched[t]) continue;
        int s = -1;
        if (!second)
          s = !nb_matched[t][0] ? 0 : (!nb_matched[t][1] ? 1 : -1);
        else if (proposed[t] >= 0 && !nb_matched[t][1 - proposed[t]])
          s = 1 - proposed[t];
        proposed[t] = s;
        if (s < 0) continue;
        msgs.push_back({t, tokens_[t].nb[s].token, tokens_[t].nb[s].side, {1, 0, 0}});
      }
      return tn_.exchange(msgs);
    };
    // the lowest-id proposer wins; the reply also refreshes matched status
    auto accept = [&](const std::vector<std::vector<detail::TokenDelivery>>& proposals) {
      std::vector<detail::TokenMessage> msgs;
      for (TokenId t = 0; t < n_tok; ++t) {
        if (!contracting(t)) continue;
        int win = -1;
        if (!matched[t]) {
          for (const auto& d : proposals[t]) {
            if (win < 0 || tokens_[t].nb[d.side].token < tokens_[t].nb[win].token) win = d.side;
          }
          if (win >= 0) {
            matched[t] = 1;
            partner[t] = win;
          }
        }
        for (std::uint8_t s = 0; s < 2; ++s)
          msgs.push_back({t, tokens_[t].nb[s].token, tokens_[t].nb[s].side,
                          {matched[t], static_cast<Word>(win == s ? 1 : 0), 0}});
      }
      auto in = tn_.exchange(msgs);
      for (TokenId t = 0; t < n_tok; ++t) {
        for (const auto& d : in[t]) {
          nb_matched[t][d.side] = static_cast<std::uint8_t>(d.data[0]);
          if (d.data[1] && proposed[t] == d.side && !matched[t]) {
            matched[t] = 1;
            partner[t] = d.side;
          }
        }
      }
    };

    for (int c = 0; c < 3; ++c) {
      broadcast_status();
      accept(propose(c, false));
      accept(propose(c, true));
      std::ranges::fill(proposed, -1);
    }

    std::vector<std::uint8_t> marked(n_tok, 0);
    for (TokenId t = 0; t < n_tok; ++t) {
      if (!contracting(t)) continue;
      if (matched[t] && tokens_[t].nb[partner[t]].token < t) marked[t] = 1;
    }
    return marked;
  }

  void splice(const std::vector<std::uint8_t>& marked) {
    PhaseScope scope(tn_.net(), "euler:splice");
    const auto n_tok = static_cast<TokenId>(tokens_.size());
    std::vector<std::array<Link, 2>> next(n_tok);
    std::vector<std::array<std::int64_t, 2>> next_acc(n_tok);
    std::vector<std::array<std::uint8_t, 2>> got(n_tok, {0, 0});
    std::vector<detail::TokenMessage> flight;
    for (TokenId t = 0; t < n_tok; ++t) {
      if (!marked[t]) continue;
      for (std::uint8_t s = 0; s < 2; ++s)
        flight.push_back({t, tokens_[t].nb[s].token, tokens_[t].nb[s].side,
                          {static_cast<Word>(t) * 2 + s, to_word(tokens_[t].acc[s]), 1}});
    }
    for (std::size_t hop = 1; hop <= 4; ++hop) {
      auto in = tn_.exchange(flight);
      flight.clear();
      for (TokenId t = 0; t < n_tok; ++t) {
        auto& tk = tokens_[t];
        for (const auto& d : in[t]) {
          const auto origin = static_cast<TokenId>(d.data[0] / 2);
          const auto origin_side = static_cast<std::uint8_t>(d.data[0] % 2);
          const std::int64_t acc = word_to_int(d.data[1]);
          if (marked[t]) {
            next[t][d.side] = Link{origin, origin_side};
            next_acc[t][d.side] = -acc;
            got[t][d.side] = 1;
            stats_.max_splice_hops = std::max(stats_.max_splice_hops, hop);
            continue;
          }
          if (hop == 4) throw std::logic_error("splice would need a fifth hop");
          tk.hops[d.side] = hop;
          const int fwd = 1 - d.side;
          flight.push_back({t, tk.nb[fwd].token, tk.nb[fwd].side, {d.data[0], to_word(acc + tk.acc[fwd]), hop + 1}});
        }
      }
    }
    for (TokenId t = 0; t < n_tok; ++t) {
      if (!contracting(t)) continue;
      auto& tk = tokens_[t];
      if (marked[t]) {
        if (!got[t][0] || !got[t][1]) throw std::logic_error("survivor missed a splice message");
        tk.nb = next[t];
        tk.acc = next_acc[t];
      }
    }
    for (TokenId t = 0; t < n_tok; ++t) {
      if (contracting(t) && !marked[t]) {
        tokens_[t].active = false;
        tokens_[t].died_at = static_cast<int>(iteration_);
      }
    }
  }

  const WeightedGraph& g_;
  detail::TokenNetwork tn_;
  std::vector<Token> tokens_;
  OrientStats stats_;
  std::size_t iteration_ = 0;
};

inline OrientResult orient(const WeightedGraph& g, RoundLedger& ledger, std::span<const std::int64_t> costs = {}) {
  EulerProtocol p(g, ledger, costs);
  const std::size_t iterations = ceil_log2(g.num_vertices());
  for (std::size_t i = 0; i < iterations; ++i) p.contract_once();
  p.elect_and_direct();
  p.reverse();
  OrientResult r{p.orientation(), p.stats()};
  r.stats.exchanges = p.exchanges();
  return r;
}

}  // namespace cliqueflow
