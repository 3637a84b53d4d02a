#pragma once

#include <deque>
#include <exception>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bargain/game.hpp"

namespace bargain {

/// What one player may see at a decision point. Non-owning; valid for the
/// duration of the call that receives it. Never carries other players'
/// valuations.
struct Observation {
  int self;
  const GameConfig& config;
  std::span<const Cents> own_values;
  const Holdings& holdings;
  std::span<const TurnRecord> history;
  int round;
  int turn;
  std::span<const int> turn_order;

  std::span<const int> own_holdings() const { return holdings.row(self); }
  int n_players() const { return static_cast<int>(holdings.rows()); }
  int current_proposer() const { return turn_order[static_cast<std::size_t>(turn) % turn_order.size()]; }
};

inline Observation observation_for(const Game& game, int player) {
  return {player,
          game.config(),
          game.valuations().row(player),
          game.holdings(),
          game.history(),
          game.current_round(),
          game.turns_played(),
          game.turn_order()};
}

/// Behavior contract every seat implements.
class Agent {
 public:
  virtual ~Agent() = default;

  virtual Offer propose(const Observation& obs) = 0;
  virtual Response respond(const Observation& obs, const Offer& offer) = 0;
  // Called once per completed turn; `obs` reflects post-turn state.
  virtual void observe(const Observation& /*obs*/, const TurnRecord& /*record*/) {}
  virtual std::string_view kind() const = 0;

  // Count of degraded or corrected decisions attributed to this agent.
  int flags() const { return flags_; }
  void add_flag() { ++flags_; }

 private:
  int flags_ = 0;
};

/// Accept iff the responder can pay and strictly gains.
inline Response myopic_response(const Observation& obs, const Offer& offer) {
  if (!can_pay(obs.own_holdings(), offer)) return Response::Decline;
  return responder_delta(obs.own_values, offer) > 0 ? Response::Accept : Response::Decline;
}

inline int max_opponent_holding(const Observation& obs, int color) {
  int best = 0;
  for (int p = 0; p < obs.n_players(); ++p)
    if (p != obs.self) best = std::max(best, obs.holdings(p, color));
  return best;
}

/// Visits every feasible non-Pass offer with strictly positive proposer
/// surplus in lexicographic (give, get, give_qty, get_qty) order:
/// give_qty <= own holdings, get_qty <= the largest opponent holding.
template <typename Fn>
void for_each_profitable_offer(const Observation& obs, Fn&& fn) {
  const int m = obs.config.n_colors();
  const auto own = obs.own_holdings();
  for (int g = 0; g < m; ++g) {
    for (int r = 0; r < m; ++r) {
      if (g == r) continue;
      const int max_get = max_opponent_holding(obs, r);
      for (int x = 1; x <= own[g]; ++x)
        for (int y = 1; y <= max_get; ++y) {
          const Offer o = Offer::trade(g, x, r, y);
          if (proposer_delta(obs.own_values, o) > 0) fn(o);
        }
    }
  }
}

/// Proposes the smallest positive-surplus balanced (q for q) trade.
class GreedyConcessionaryAgent final : public Agent {
 public:
  Offer propose(const Observation& obs) override {
    const int m = obs.config.n_colors();
    const auto own = obs.own_holdings();
    Offer best = Offer::pass();
    Cents best_delta = std::numeric_limits<Cents>::max();
    for (int g = 0; g < m; ++g)
      for (int r = 0; r < m; ++r) {
        if (g == r) continue;
        const int cap = std::min(own[g], max_opponent_holding(obs, r));
        for (int q = 1; q <= cap; ++q) {
          const Offer o = Offer::trade(g, q, r, q);
          const Cents d = proposer_delta(obs.own_values, o);
          if (d > 0 && d < best_delta) {
            best = o;
            best_delta = d;
          }
        }
      }
    return best;
  }
  Response respond(const Observation& obs, const Offer& offer) override { return myopic_response(obs, offer); }
  std::string_view kind() const override { return "greedy"; }
};

/// Proposes uniformly among all positive-surplus feasible offers.
class RandomRationalAgent final : public Agent {
 public:
  explicit RandomRationalAgent(std::uint64_t seed) : rng_(seed) {}

  Offer propose(const Observation& obs) override {
    std::vector<Offer> candidates;
    for_each_profitable_offer(obs, [&](const Offer& o) { candidates.push_back(o); });
    if (candidates.empty()) return Offer::pass();
    return candidates[rng_.below(candidates.size())];
  }
  Response respond(const Observation& obs, const Offer& offer) override { return myopic_response(obs, offer); }
  std::string_view kind() const override { return "random"; }

 private:
  Rng rng_;
};

/// Replays fixed decisions; falls back to Pass / Decline when exhausted.
class ScriptedAgent final : public Agent {
 public:
  ScriptedAgent(std::deque<Offer> proposals, std::deque<Response> responses)
      : proposals_(std::move(proposals)), responses_(std::move(responses)) {}

  Offer propose(const Observation&) override {
    if (proposals_.empty()) return Offer::pass();
    Offer o = proposals_.front();
    proposals_.pop_front();
    return o;
  }
  Response respond(const Observation&, const Offer&) override {
    if (responses_.empty()) return Response::Decline;
    Response r = responses_.front();
    responses_.pop_front();
    return r;
  }
  std::string_view kind() const override { return "scripted"; }

 private:
  std::deque<Offer> proposals_;
  std::deque<Response> responses_;
};

// ---------------------------------------------------------------------------
// Turn driver shared by the batch runner and the play service.

/// Asks the proposer's agent for an offer. Invalid offers and exceptions
/// become Pass and are flagged on the agent. Returns (offer, flagged).
inline std::pair<Offer, bool> solicit_proposal(const Game& game, Agent& agent) {
  const int p = game.current_proposer();
  try {
    Offer o = agent.propose(observation_for(game, p));
    if (!game.validate_offer(p, o)) return {o, false};
  } catch (const std::exception&) {
  }
  agent.add_flag();
  return {Offer::pass(), true};
}

inline Response solicit_response(const Game& game, Agent& agent, int player, const Offer& offer) {
  try {
    return agent.respond(observation_for(game, player), offer);
  } catch (const std::exception&) {
    agent.add_flag();
    return Response::Decline;
  }
}

inline void notify_all(const Game& game, std::span<Agent* const> agents, const TurnRecord& rec) {
  for (int p = 0; p < static_cast<int>(agents.size()); ++p)
    if (agents[p]) agents[p]->observe(observation_for(game, p), rec);
}

/// Plays one turn fully automatically. Every response is collected before
/// any is applied, so no agent sees another's decision for this turn.
inline const TurnRecord& play_turn(Game& game, std::span<Agent* const> agents) {
  const int p = game.current_proposer();
  auto [offer, flagged] = solicit_proposal(game, *agents[p]);
  std::vector<Response> responses(agents.size(), Response::None);
  if (!offer.is_pass())
    for (int j = 0; j < static_cast<int>(agents.size()); ++j)
      if (j != p) responses[j] = solicit_response(game, *agents[j], j, offer);
  const TurnRecord& rec = game.apply_turn(offer, responses, flagged);
  notify_all(game, agents, rec);
  return rec;
}

inline void play_game(Game& game, std::span<Agent* const> agents) {
  if (static_cast<int>(agents.size()) != game.config().n_players)
    throw ProtocolError("need one agent per player");
  while (!game.is_terminal()) play_turn(game, agents);
}

inline void play_game(Game& game, const std::vector<std::unique_ptr<Agent>>& agents) {
  std::vector<Agent*> raw;
  for (const auto& a : agents) raw.push_back(a.get());
  play_game(game, std::span<Agent* const>(raw));
}

}  // namespace bargain
