#pragma once

// Round-synchronous congested clique emulation with per-node bandwidth
// enforcement and a ledger of charged rounds.

#include <algorithm>
#include <array>
#include <bit>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"

namespace cliqueflow {

using NodeId = std::uint32_t;
using Word = std::uint64_t;

inline Word to_word(double x) noexcept { return std::bit_cast<Word>(x); }
inline double word_to_double(Word w) noexcept { return std::bit_cast<double>(w); }
inline Word to_word(std::int64_t x) noexcept { return static_cast<Word>(x); }
inline std::int64_t word_to_int(Word w) noexcept { return static_cast<std::int64_t>(w); }

inline constexpr std::size_t kPayloadCapacity = 8;
inline constexpr std::uint64_t kDefaultRouteRounds = 16;

class Payload {
 public:
  Payload() = default;
  Payload(std::initializer_list<Word> words) {
    for (Word w : words) push_back(w);
  }

  void push_back(Word w) {
    if (size_ == kPayloadCapacity) throw std::length_error("payload capacity exceeded");
    words_[size_++] = w;
  }
  std::size_t size() const noexcept { return size_; }
  Word operator[](std::size_t i) const noexcept { return words_[i]; }
  std::span<const Word> words() const noexcept { return {words_.data(), size_}; }

  friend bool operator==(const Payload& a, const Payload& b) noexcept {
    return std::ranges::equal(a.words(), b.words());
  }
  friend std::strong_ordering operator<=>(const Payload& a, const Payload& b) noexcept {
    return std::lexicographical_compare_three_way(a.words_.begin(), a.words_.begin() + a.size_, b.words_.begin(),
                                                  b.words_.begin() + b.size_);
  }

 private:
  std::array<Word, kPayloadCapacity> words_{};
  std::uint8_t size_ = 0;
};

struct Message {
  NodeId src = 0;
  NodeId dst = 0;
  Payload payload;

  friend bool operator==(const Message&, const Message&) = default;
};

class RoundLedger {
 public:
  void charge(const std::string& phase, std::uint64_t rounds) {
    rounds_charged_ += rounds;
    per_phase_[phase] += rounds;
  }
  void count_messages(std::uint64_t k) noexcept { messages_sent_ += k; }
  void merge(const RoundLedger& other) {
    for (const auto& [phase, r] : other.per_phase_) charge(phase, r);
    messages_sent_ += other.messages_sent_;
  }

  std::uint64_t rounds_charged() const noexcept { return rounds_charged_; }
  std::uint64_t messages_sent() const noexcept { return messages_sent_; }
  const std::map<std::string, std::uint64_t>& per_phase() const noexcept { return per_phase_; }
  std::uint64_t phase(const std::string& name) const {
    auto it = per_phase_.find(name);
    return it == per_phase_.end() ? 0 : it->second;
  }

  // phase<TAB>rounds per line, phases in lexicographic order
  std::string to_tsv() const {
    std::string out;
    for (const auto& [phase, r] : per_phase_) out += phase + "\t" + std::to_string(r) + "\n";
    return out;
  }

  friend bool operator==(const RoundLedger&, const RoundLedger&) = default;

 private:
  std::uint64_t rounds_charged_ = 0;
  std::uint64_t messages_sent_ = 0;
  std::map<std::string, std::uint64_t> per_phase_;
};

struct NetworkConfig {
  std::size_t words_per_message = 4;
  std::uint64_t route_rounds = kDefaultRouteRounds;
};

// Messages a node emits during one synchronous round.
class Outbox {
 public:
  Outbox(NodeId self, std::vector<Message>& sink) : self_(self), sink_(&sink) {}

  void send(NodeId dst, Payload payload) {
    if (dst == self_) throw std::invalid_argument("self-messages are local computation");
    sink_->push_back(Message{self_, dst, std::move(payload)});
  }
  void send(NodeId dst, std::initializer_list<Word> words) { send(dst, Payload(words)); }

 private:
  NodeId self_;
  std::vector<Message>* sink_;
};

template <class State = std::monostate>
class CliqueNetwork {
 public:
  CliqueNetwork(std::size_t n, RoundLedger& ledger, NetworkConfig cfg = {})
      : n_(n), cfg_(cfg), ledger_(&ledger), states_(n), inboxes_(n) {
    if (n == 0) throw std::invalid_argument("network needs at least one node");
    if (cfg.words_per_message == 0 || cfg.words_per_message > kPayloadCapacity)
      throw std::invalid_argument("words per message out of range");
  }

  std::size_t size() const noexcept { return n_; }
  const NetworkConfig& config() const noexcept { return cfg_; }
  RoundLedger& ledger() noexcept { return *ledger_; }
  const RoundLedger& ledger() const noexcept { return *ledger_; }

  State& state(NodeId v) { return states_.at(v); }
  const State& state(NodeId v) const { return states_.at(v); }
  std::span<const Message> inbox(NodeId v) const { return inboxes_.at(v); }

  void set_phase(std::string phase) { phase_ = std::move(phase); }
  const std::string& phase() const noexcept { return phase_; }

  // handler(NodeId, State&, std::span<const Message> inbox, Outbox&)
  template <class Handler>
  void run_round(Handler&& handler) {
    std::vector<std::vector<Message>> out(n_);
    for (NodeId v = 0; v < n_; ++v) {
      Outbox box(v, out[v]);
      handler(v, states_[v], std::span<const Message>(inboxes_[v]), box);
    }
    std::vector<std::size_t> per_dst(n_, 0);
    std::vector<std::vector<Message>> next(n_);
    std::size_t total = 0;
    for (NodeId v = 0; v < n_; ++v) {
      auto& msgs = out[v];
      if (msgs.size() > n_ - 1) throw BandwidthViolation(v, msgs.size());
      for (const auto& m : msgs) {
        check_payload(m);
        if (m.dst >= n_) throw std::out_of_range("destination outside the network");
        if (++per_dst[m.dst] > 1) {
          std::size_t same = static_cast<std::size_t>(
              std::ranges::count_if(msgs, [&](const Message& x) { return x.dst == m.dst; }));
          throw BandwidthViolation(v, same);
        }
      }
      for (const auto& m : msgs) per_dst[m.dst] = 0;
      total += msgs.size();
      for (auto& m : msgs) next[m.dst].push_back(std::move(m));
    }
    // senders are visited in increasing order, so each inbox is already sorted by src
    inboxes_ = std::move(next);
    ledger_->charge(phase_, 1);
    ledger_->count_messages(total);
  }

  // Lenzen-style routing: the schedule is charged, its precondition is checked.
  void route_batch(std::vector<Message> batch) {
    std::vector<std::size_t> src_count(n_, 0), dst_count(n_, 0);
    for (const auto& m : batch) {
      if (m.src >= n_ || m.dst >= n_) throw std::out_of_range("message endpoint outside the network");
      if (m.src == m.dst) throw std::invalid_argument("self-messages are local computation");
      check_payload(m);
      ++src_count[m.src];
      ++dst_count[m.dst];
    }
    for (NodeId v = 0; v < n_; ++v) {
      if (src_count[v] > n_) throw RoutingPreconditionViolation(v, RouteRole::source, src_count[v]);
      if (dst_count[v] > n_) throw RoutingPreconditionViolation(v, RouteRole::destination, dst_count[v]);
    }
    std::vector<std::vector<Message>> next(n_);
    for (NodeId v = 0; v < n_; ++v) next[v].reserve(dst_count[v]);
    for (auto& m : batch) next[m.dst].push_back(std::move(m));
    for (auto& box : next) {
      std::ranges::sort(box, [](const Message& a, const Message& b) {
        if (a.src != b.src) return a.src < b.src;
        return a.payload < b.payload;
      });
    }
    inboxes_ = std::move(next);
    ledger_->charge(phase_, cfg_.route_rounds);
    ledger_->count_messages(batch.size());
    ++route_batches_;
  }

  // Charges `rounds` repetitions of a fixed one-word exchange pattern after
  // checking it against the per-round limits; used for Laplacian products
  // whose values are combined locally.
  void charge_pattern(std::span<const std::size_t> sends, std::span<const std::size_t> recvs, std::uint64_t rounds) {
    if (sends.size() != n_ || recvs.size() != n_) throw DimensionMismatch("pattern size differs from network size");
    std::uint64_t total = 0;
    for (NodeId v = 0; v < n_; ++v) {
      if (sends[v] > n_ - 1) throw BandwidthViolation(v, sends[v]);
      if (recvs[v] > n_ - 1) throw BandwidthViolation(v, recvs[v]);
      total += sends[v];
    }
    ledger_->charge(phase_, rounds);
    ledger_->count_messages(total * rounds);
  }

  std::size_t route_batches() const noexcept { return route_batches_; }

 private:
  void check_payload(const Message& m) const {
    if (m.payload.size() > cfg_.words_per_message) throw PayloadOverflow(m.src, m.payload.size());
  }

  std::size_t n_;
  NetworkConfig cfg_;
  RoundLedger* ledger_;
  std::vector<State> states_;
  std::vector<std::vector<Message>> inboxes_;
  std::string phase_ = "unlabelled";
  std::size_t route_batches_ = 0;
};

// Sets a phase label for the lifetime of the scope.
template <class Net>
class PhaseScope {
 public:
  PhaseScope(Net& net, std::string phase) : net_(net), saved_(net.phase()) { net_.set_phase(std::move(phase)); }
  ~PhaseScope() { net_.set_phase(std::move(saved_)); }
  PhaseScope(const PhaseScope&) = delete;
  PhaseScope& operator=(const PhaseScope&) = delete;

 private:
  Net& net_;
  std::string saved_;
};

// Splits messages into route_batch calls that each satisfy the <= n bound.
template <class State>
std::size_t route_in_batches(CliqueNetwork<State>& net, std::vector<Message> msgs,
                             std::vector<std::vector<Message>>& delivered) {
  const std::size_t n = net.size();
  std::vector<std::vector<Message>> batches;
  std::vector<std::vector<std::size_t>> src_load, dst_load;
  for (auto& m : msgs) {
    std::size_t b = 0;
    while (b < batches.size() && (src_load[b][m.src] >= n || dst_load[b][m.dst] >= n)) ++b;
    if (b == batches.size()) {
      batches.emplace_back();
      src_load.emplace_back(n, 0);
      dst_load.emplace_back(n, 0);
    }
    ++src_load[b][m.src];
    ++dst_load[b][m.dst];
    batches[b].push_back(std::move(m));
  }
  if (batches.empty()) batches.emplace_back();
  delivered.assign(n, {});
  for (auto& batch : batches) {
    net.route_batch(std::move(batch));
    for (NodeId v = 0; v < n; ++v) {
      auto box = net.inbox(v);
      delivered[v].insert(delivered[v].end(), box.begin(), box.end());
    }
  }
  if (batches.size() > 1) {
    for (auto& box : delivered) {
      std::ranges::sort(box, [](const Message& a, const Message& b) {
        if (a.src != b.src) return a.src < b.src;
        return a.payload < b.payload;
      });
    }
  }
  return batches.size();
}

}  // namespace cliqueflow
