#pragma once

#include <algorithm>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bargain/game_log.hpp"

namespace bargain::analytics {

enum class Alternative { DeclineInstead, AcceptInstead, PassInstead };

struct Substitution {
  int turn;
  int player;
  Alternative alternative;
};

class CounterfactualError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CounterfactualPath {
  int focal = 0;
  std::vector<Cents> values;       // focal welfare before turn 0 and after each turn
  std::vector<Holdings> holdings;  // holdings before turn 0 and after each turn
  std::vector<bool> executed;
  std::vector<bool> dropped;       // recorded trade no longer inventory-feasible
  Cents final_value() const { return values.back(); }
};

/// Replays the recorded action stream with the given substitutions. Other
/// recorded trades are kept when still inventory-feasible and dropped
/// otherwise; non-executed turns stay non-executed. At an accept-instead
/// turn the substituting player is the counterparty. At a decline-instead
/// turn where the substituting player was selected, the lowest-id other
/// accepter (if any) takes the trade.
inline CounterfactualPath replay_with(const GameLog& log, int focal, std::span<const Substitution> subs) {
  const auto& values = log.header.valuations;
  const int n = log.header.config.n_players;
  if (focal < 0 || focal >= n) throw CounterfactualError("focal player out of range");
  CounterfactualPath path;
  path.focal = focal;
  Holdings h = log.header.initial;
  path.values.push_back(welfare(values, h, focal));
  path.holdings.push_back(h);

  for (const auto& rec : log.turns) {
    const Substitution* sub = nullptr;
    for (const auto& s : subs)
      if (s.turn == rec.turn) sub = &s;
    const Offer& o = rec.offer;
    std::optional<int> acceptor;
    bool dropped = false;

    if (sub) {
      const int p = sub->player;
      if (p < 0 || p >= n) throw CounterfactualError("substituted player out of range");
      switch (sub->alternative) {
        case Alternative::PassInstead:
          if (p != rec.proposer) throw CounterfactualError("pass-instead requires the proposer");
          break;
        case Alternative::DeclineInstead: {
          if (p == rec.proposer || rec.responses[p] != Response::Accept)
            throw CounterfactualError("decline-instead requires a recorded accept");
          if (rec.executed && *rec.selected_acceptor != p) {
            acceptor = rec.selected_acceptor;
          } else {
            for (int q : rec.accepters())
              if (q != p) {
                acceptor = q;
                break;
              }
          }
          if (acceptor && !(can_pay(h.row(*acceptor), o) && !check_offer(h.row(rec.proposer), o))) {
            acceptor.reset();
            dropped = true;
          }
          break;
        }
        case Alternative::AcceptInstead:
          if (o.is_pass() || p == rec.proposer || rec.responses[p] == Response::Accept)
            throw CounterfactualError("accept-instead requires a declined non-Pass offer");
          if (!can_pay(h.row(p), o) || check_offer(h.row(rec.proposer), o))
            throw CounterfactualError("accept-instead is inventory-infeasible at turn " + std::to_string(rec.turn));
          acceptor = p;
          break;
      }
    } else if (rec.executed) {
      const int a = *rec.selected_acceptor;
      if (can_pay(h.row(a), o) && !check_offer(h.row(rec.proposer), o))
        acceptor = a;
      else
        dropped = true;
    }

    if (acceptor) execute_trade(h, rec.proposer, *acceptor, o);
    path.executed.push_back(acceptor.has_value());
    path.dropped.push_back(dropped);
    path.values.push_back(welfare(values, h, focal));
    path.holdings.push_back(h);
  }
  return path;
}

inline CounterfactualPath counterfactual_replay(const GameLog& log, int turn, int focal, Alternative alternative) {
  if (turn < 0 || turn >= static_cast<int>(log.turns.size())) throw CounterfactualError("turn out of range");
  const Substitution s{turn, focal, alternative};
  return replay_with(log, focal, std::span<const Substitution>(&s, 1));
}

inline CounterfactualPath actual_path(const GameLog& log, int focal) { return replay_with(log, focal, {}); }

// ---------------------------------------------------------------------------

enum class Role { Proposer, Acceptor, Decliner };
enum class RegretKind { NoRegret, ForcedRegret, UnforcedRegret, Unscored };

inline std::string_view to_string(Role r) {
  switch (r) {
    case Role::Proposer: return "proposer";
    case Role::Acceptor: return "acceptor";
    case Role::Decliner: return "decliner";
  }
  return "?";
}

inline std::string_view to_string(RegretKind k) {
  switch (k) {
    case RegretKind::NoRegret: return "no_regret";
    case RegretKind::ForcedRegret: return "forced_regret";
    case RegretKind::UnforcedRegret: return "unforced_regret";
    case RegretKind::Unscored: return "unscored";
  }
  return "?";
}

struct RegretLabel {
  int turn = 0;
  int player = 0;
  Role role = Role::Proposer;
  RegretKind label = RegretKind::Unscored;
  Cents action_surplus = 0;       // the focal player's own delta for the action
  Cents counterfactual_gain = 0;  // best counterfactual final value minus actual final value
  std::string reason;             // why Unscored
  std::vector<int> evidence;      // later turns supporting the label
};

namespace detail {

// Per-unit surplus a > b for fractions da/qa vs db/qb with positive q.
inline bool unit_better(Cents da, int qa, Cents db, int qb) {
  return static_cast<__int128>(da) * qb > static_cast<__int128>(db) * qa;
}

// Proposer or acceptor who committed inventory at `turn`, receiving
// `recv_qty` of `recv_color` for surplus `delta`.
inline RegretLabel label_commitment(const GameLog& log, const CounterfactualPath& actual, int turn, int focal,
                                    Role role, int recv_color, int recv_qty, Cents delta, Alternative undo) {
  RegretLabel lab{turn, focal, role, RegretKind::NoRegret, delta, 0, {}, {}};
  const auto& values = log.header.valuations;
  const Substitution sub{turn, focal, undo};
  const CounterfactualPath cf = replay_with(log, focal, std::span<const Substitution>(&sub, 1));

  std::vector<int> forced;
  std::vector<int> better;
  for (std::size_t k = static_cast<std::size_t>(turn) + 1; k < log.turns.size(); ++k) {
    const auto& alt = log.turns[k];
    if (alt.offer.is_pass() || alt.proposer == focal || alt.offer.give_color != recv_color) continue;
    const Cents alt_delta = responder_delta(values, focal, alt.offer);
    if (!unit_better(alt_delta, alt.offer.give_qty, delta, recv_qty)) continue;
    better.push_back(static_cast<int>(k));
    const bool feasible_actual = can_pay(actual.holdings[k].row(focal), alt.offer);
    const bool feasible_cf = can_pay(cf.holdings[k].row(focal), alt.offer) &&
                             !check_offer(cf.holdings[k].row(alt.proposer), alt.offer);
    if (!feasible_actual && feasible_cf) forced.push_back(static_cast<int>(k));
  }
  if (forced.empty()) {
    lab.evidence = std::move(better);
    return lab;
  }
  lab.label = RegretKind::ForcedRegret;
  lab.evidence = forced;
  Cents best_gain = std::numeric_limits<Cents>::min();
  for (int k : forced) {
    const Substitution both[] = {sub, {k, focal, Alternative::AcceptInstead}};
    try {
      best_gain = std::max(best_gain, replay_with(log, focal, both).final_value() - actual.final_value());
    } catch (const CounterfactualError&) {
    }
  }
  lab.counterfactual_gain = best_gain == std::numeric_limits<Cents>::min() ? 0 : best_gain;
  return lab;
}

}  // namespace detail

/// Labels every scored action in a fully revealed log. `values` defaults
/// to the header's valuations (post-hoc analysis has full information).
inline std::vector<RegretLabel> classify_actions(const GameLog& log, const Valuations* values_override = nullptr) {
  GameLog local;
  const GameLog* lg = &log;
  if (values_override) {
    local = log;
    local.header.valuations = *values_override;
    lg = &local;
  }
  const auto& L = *lg;
  const auto& values = L.header.valuations;
  const int n = L.header.config.n_players;

  std::vector<CounterfactualPath> actual;
  for (int p = 0; p < n; ++p) actual.push_back(actual_path(L, p));

  std::vector<RegretLabel> out;
  for (const auto& rec : L.turns) {
    if (rec.offer.is_pass()) continue;
    const Offer& o = rec.offer;
    const int t = rec.turn;

    // Proposer: scored only on executed, strictly profitable proposals.
    const Cents pd = proposer_delta(values, rec.proposer, o);
    if (!rec.executed) {
      out.push_back({t, rec.proposer, Role::Proposer, RegretKind::Unscored, pd, 0, "rejected proposal", {}});
    } else if (pd <= 0) {
      out.push_back({t, rec.proposer, Role::Proposer, RegretKind::Unscored, pd, 0, "negative-surplus action", {}});
    } else {
      out.push_back(detail::label_commitment(L, actual[rec.proposer], t, rec.proposer, Role::Proposer, o.get_color,
                                             o.get_qty, pd, Alternative::PassInstead));
    }

    for (int j = 0; j < n; ++j) {
      if (j == rec.proposer) continue;
      const Cents rd = responder_delta(values, j, o);
      if (rec.coerced[j]) {
        out.push_back({t, j, Role::Acceptor, RegretKind::Unscored, rd, 0, "infeasible accept", {}});
        continue;
      }
      if (rec.responses[j] == Response::Accept) {
        if (rd <= 0)
          out.push_back({t, j, Role::Acceptor, RegretKind::Unscored, rd, 0, "negative-surplus action", {}});
        else
          out.push_back(detail::label_commitment(L, actual[j], t, j, Role::Acceptor, o.give_color, o.give_qty, rd,
                                                 Alternative::DeclineInstead));
        continue;
      }
      if (rec.responses[j] != Response::Decline) continue;
      if (!can_pay(rec.pre_holdings.row(j), o)) {
        out.push_back({t, j, Role::Decliner, RegretKind::Unscored, rd, 0, "could not afford", {}});
        continue;
      }
      RegretLabel lab{t, j, Role::Decliner, RegretKind::NoRegret, rd, 0, {}, {}};
      try {
        const auto cf = counterfactual_replay(L, t, j, Alternative::AcceptInstead);
        lab.counterfactual_gain = cf.final_value() - actual[j].final_value();
      } catch (const CounterfactualError&) {
        // proposer could not pay in replay; nothing to regret
      }
      if (lab.counterfactual_gain >= 1) lab.label = RegretKind::UnforcedRegret;
      for (std::size_t k = static_cast<std::size_t>(t) + 1; k < L.turns.size(); ++k)
        if (L.turns[k].offer == o && L.turns[k].proposer == rec.proposer) lab.evidence.push_back(static_cast<int>(k));
      out.push_back(std::move(lab));
    }
  }
  return out;
}

}  // namespace bargain::analytics
