#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "bargain/agent.hpp"
#include "bargain/belief.hpp"

namespace bargain {

using Wide = __int128;

struct BayesianOptions {
  // Assume opponents only propose trades that strictly benefit themselves.
  // Disable against humans / LLMs, who propose value-losing trades.
  bool prune_on_proposals = true;
};

struct MisspecificationEvent {
  int turn;
  int opponent;
};

/// One belief per player id; the entry for the agent itself is empty.
using BeliefSet = std::vector<std::optional<BeliefState>>;

inline BeliefSet uniform_beliefs(const GameConfig& config, int self) {
  auto space = std::make_shared<const ValuationSpace>(config);
  BeliefSet beliefs(static_cast<std::size_t>(config.n_players));
  for (int p = 0; p < config.n_players; ++p)
    if (p != self) beliefs[p].emplace(space);
  return beliefs;
}

namespace detail {

// Marginal belief over one opponent's (v_give, v_get) pair, sorted by
// v_get / v_give ascending so that, for any (x, y), the accepting states
// (v_give*x > v_get*y) form a prefix.
class PairMarginal {
 public:
  PairMarginal(const BeliefState& belief, int give, int get) {
    std::map<std::pair<Cents, Cents>, std::uint64_t> agg;
    const auto& space = belief.space();
    for (std::size_t s = 0; s < belief.size(); ++s)
      if (belief.weight(s)) agg[{space.value(s, give), space.value(s, get)}] += belief.weight(s);
    for (const auto& [k, w] : agg) entries_.push_back({k.first, k.second, w});
    std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
      // a.vr / a.vg < b.vr / b.vg with v_give == 0 ordered last
      if (a.vg == 0 || b.vg == 0) return a.vg != 0 && b.vg == 0;
      return a.vr * b.vg < b.vr * a.vg;
    });
    prefix_.assign(entries_.size() + 1, 0);
    for (std::size_t i = 0; i < entries_.size(); ++i) prefix_[i + 1] = prefix_[i] + entries_[i].w;
  }

  std::uint64_t accepting(int x, int y) const {
    const auto it = std::partition_point(entries_.begin(), entries_.end(), [&](const Entry& e) {
      return e.vg * x > e.vr * y;
    });
    return prefix_[static_cast<std::size_t>(it - entries_.begin())];
  }

 private:
  struct Entry {
    Cents vg, vr;
    std::uint64_t w;
  };
  std::vector<Entry> entries_;
  std::vector<std::uint64_t> prefix_;
};

}  // namespace detail

struct ProposalScore {
  Offer offer;
  // Expected payoff numerator over the common denominator prod_j W_j:
  // delta * (prod W_j - prod (W_j - A_j)), in cents.
  Wide numerator = 0;
  Wide denominator = 1;

  double expected_cents() const { return static_cast<double>(numerator) / static_cast<double>(denominator); }
};

/// Maximizes delta_u * P(at least one eligible opponent accepts) over all
/// feasible positive-surplus offers, with acceptance independent across
/// opponents. Ties go to the lexicographically first (give, get, x, y).
/// `eligible` restricts who may respond (empty = every opponent); the
/// get_qty bound is the largest holding among eligible opponents.
inline ProposalScore best_proposal(const Observation& obs, const BeliefSet& beliefs,
                                   std::span<const int> eligible = {}) {
  std::vector<int> opponents;
  if (eligible.empty()) {
    for (int p = 0; p < obs.n_players(); ++p)
      if (p != obs.self) opponents.push_back(p);
  } else {
    opponents.assign(eligible.begin(), eligible.end());
  }

  Wide total = 1;
  for (int j : opponents) total *= static_cast<Wide>(beliefs[j]->total_weight());

  ProposalScore best{Offer::pass(), 0, total};
  const int m = obs.config.n_colors();
  const auto own = obs.own_holdings();
  std::vector<detail::PairMarginal> marginals;
  for (int g = 0; g < m; ++g) {
    for (int r = 0; r < m; ++r) {
      if (g == r || own[g] == 0) continue;
      int max_get = 0;
      for (int j : opponents) max_get = std::max(max_get, obs.holdings(j, r));
      if (max_get == 0) continue;
      marginals.clear();
      for (int j : opponents) marginals.emplace_back(*beliefs[j], g, r);
      for (int x = 1; x <= own[g]; ++x) {
        for (int y = 1; y <= max_get; ++y) {
          const Cents delta = obs.own_values[r] * y - obs.own_values[g] * x;
          if (delta <= 0) continue;
          Wide none_accept = 1;
          for (std::size_t k = 0; k < opponents.size(); ++k) {
            const int j = opponents[k];
            const auto w = static_cast<Wide>(beliefs[j]->total_weight());
            const Wide a = obs.holdings(j, r) >= y ? static_cast<Wide>(marginals[k].accepting(x, y)) : 0;
            none_accept *= (w - a);
          }
          const Wide score = static_cast<Wide>(delta) * (total - none_accept);
          if (score > best.numerator) best = {Offer::trade(g, x, r, y), score, total};
        }
      }
    }
  }
  return best;
}

inline Offer bayesian_propose(const Observation& obs, const BeliefSet& beliefs) {
  return best_proposal(obs, beliefs).offer;
}

/// Myopic acceptance under the agent's true valuations.
inline Response bayesian_respond(const Observation& obs, const Offer& offer) { return myopic_response(obs, offer); }

/// Prunes beliefs against one observed turn. Returns the opponents whose
/// support emptied (and were reset to the prior).
inline std::vector<int> bayesian_update(BeliefSet& beliefs, int self, const TurnRecord& rec,
                                        const BayesianOptions& opts = {}) {
  std::vector<int> resets;
  if (rec.offer.is_pass()) return resets;
  const Offer& o = rec.offer;
  for (int j = 0; j < static_cast<int>(beliefs.size()); ++j) {
    if (j == self || !beliefs[j]) continue;
    bool ok = true;
    if (j == rec.proposer) {
      if (!opts.prune_on_proposals) continue;
      ok = beliefs[j]->restrict_to([&](std::span<const Cents> v) { return proposer_delta(v, o) > 0; });
    } else {
      const Response resp = j < static_cast<int>(rec.responses.size()) ? rec.responses[j] : Response::None;
      if (resp == Response::None) continue;
      // A coerced accept or a decline without inventory says nothing about value.
      const bool could_pay = can_pay(rec.pre_holdings.row(j), o);
      if (!could_pay || rec.coerced[j]) continue;
      if (resp == Response::Accept)
        ok = beliefs[j]->restrict_to([&](std::span<const Cents> v) { return responder_delta(v, o) > 0; });
      else
        ok = beliefs[j]->restrict_to([&](std::span<const Cents> v) { return responder_delta(v, o) <= 0; });
    }
    if (!ok) resets.push_back(j);
  }
  return resets;
}

/// Bayesian-learning negotiator: proposes by expected-payoff maximization,
/// responds myopically, and prunes its beliefs after every turn.
class BayesianAgent final : public Agent {
 public:
  BayesianAgent(const GameConfig& config, int self, BayesianOptions opts = {})
      : self_(self), opts_(opts), beliefs_(uniform_beliefs(config, self)) {}

  Offer propose(const Observation& obs) override { return bayesian_propose(obs, beliefs_); }
  Response respond(const Observation& obs, const Offer& offer) override { return bayesian_respond(obs, offer); }

  void observe(const Observation&, const TurnRecord& rec) override {
    for (int j : bayesian_update(beliefs_, self_, rec, opts_)) {
      misspecifications_.push_back({rec.turn, j});
      add_flag();
    }
  }

  std::string_view kind() const override { return "bayesian"; }

  int self() const { return self_; }
  const BeliefSet& beliefs() const { return beliefs_; }
  BeliefSet& beliefs() { return beliefs_; }
  const std::vector<MisspecificationEvent>& misspecifications() const { return misspecifications_; }

  nlohmann::json beliefs_json() const {
    nlohmann::json out = nlohmann::json::object();
    for (std::size_t j = 0; j < beliefs_.size(); ++j)
      if (beliefs_[j]) out[std::to_string(j)] = beliefs_[j]->to_json();
    return out;
  }

 private:
  int self_;
  BayesianOptions opts_;
  BeliefSet beliefs_;
  std::vector<MisspecificationEvent> misspecifications_;
};

// ---------------------------------------------------------------------------
// Unbounded-horizon mode: shuffled pairwise proposals until a full pass
// executes no trade.

class NonConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ConvergenceResult {
  Holdings allocation;
  int passes = 0;
  int trades = 0;
  std::vector<TurnRecord> history;
};

/// `players[i]` must be the agent for player i. Each pass shuffles the
/// players; for every ordered pair (k < l) in the shuffled order, player k
/// proposes to player l alone, l responds myopically, and everyone prunes.
inline ConvergenceResult run_to_convergence(const GameConfig& config, const Valuations& values,
                                            std::vector<BayesianAgent>& players, const Holdings& initial,
                                            Rng& rng, int max_passes = 1000) {
  const int n = config.n_players;
  if (static_cast<int>(players.size()) != n) throw ProtocolError("need one Bayesian agent per player");
  ConvergenceResult res;
  res.allocation = initial;
  std::vector<int> order(static_cast<std::size_t>(n));
  const std::vector<TurnRecord> no_history;

  for (int pass = 0;; ++pass) {
    if (pass >= max_passes)
      throw NonConvergenceError("no convergence within " + std::to_string(max_passes) + " passes");
    bool traded = false;
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<int>(order));
    for (int k = 0; k < n; ++k) {
      for (int l = k + 1; l < n; ++l) {
        const int i = order[k];
        const int j = order[l];
        const Observation obs_i{i, config, values.row(i), res.allocation, no_history, 0, 0, order};
        const int only[] = {j};
        const Offer offer = best_proposal(obs_i, players[i].beliefs(), only).offer;
        if (offer.is_pass()) continue;

        const Observation obs_j{j, config, values.row(j), res.allocation, no_history, 0, 0, order};
        TurnRecord rec;
        rec.turn = static_cast<int>(res.history.size());
        rec.round = pass;
        rec.proposer = i;
        rec.offer = offer;
        rec.responses.assign(static_cast<std::size_t>(n), Response::None);
        rec.coerced.assign(static_cast<std::size_t>(n), false);
        rec.responses[j] = players[j].respond(obs_j, offer);
        if (rec.responses[j] == Response::Accept && !can_pay(res.allocation.row(j), offer)) {
          rec.responses[j] = Response::Decline;
          rec.coerced[j] = true;
        }
        rec.pre_holdings = res.allocation;
        if (rec.responses[j] == Response::Accept) {
          execute_trade(res.allocation, i, j, offer);
          rec.selected_acceptor = j;
          rec.executed = true;
          traded = true;
          ++res.trades;
        }
        rec.post_holdings = res.allocation;
        for (int p = 0; p < n; ++p) {
          const Observation obs_p{p, config, values.row(p), res.allocation, no_history, 0, 0, order};
          players[p].observe(obs_p, rec);
        }
        res.history.push_back(std::move(rec));
      }
    }
    res.passes = pass + 1;
    if (!traded) return res;
  }
}

}  // namespace bargain
