#pragma once

// Hand-built three-turn logs for the regret classifier.
//
// Valuations (green, red): P0 (0.50, 0.90), P1 (0.50, 0.20), P2 (0.50, 1.00).
// Everyone starts with 10 of each color.

#include <string>
#include <vector>

#include "bargain/analytics/regret.hpp"
#include "support.hpp"

namespace bargain::fixtures {

struct ExpectedLabel {
  int turn;
  int player;
  analytics::Role role;
  analytics::RegretKind label;
  Cents counterfactual_gain;
  std::vector<int> evidence;
};

struct RegretFixture {
  std::string name;
  GameLog log;
  std::vector<ExpectedLabel> expected;
};

inline Valuations fixture_values() { return testing_support::values_of({{50, 90}, {50, 20}, {50, 100}}); }

inline GameLog fixture_log(const std::string& id, std::vector<int> order,
                           const std::vector<std::pair<Offer, std::vector<Response>>>& turns) {
  Game g(GameConfig::variant(2, 11), fixture_values(), std::move(order));
  for (const auto& [offer, rs] : turns) g.apply_turn(offer, rs);
  return log_from(g, id, {"scripted", "scripted", "scripted"});
}

/// P1 sells 10 red for 10 green at turn 0 (+3.00, 0.30 per green). At turn 1
/// P2 offers 10 green for 6 red (+3.80, 0.38 per green) but P1 has no red
/// left. Had P1 declined at turn 0 it could have taken that offer.
inline RegretFixture forced_regret() {
  using enum Response;
  using analytics::RegretKind;
  using analytics::Role;
  RegretFixture f{"forced regret on inventory commitment",
                  fixture_log("fixture-forced", {0, 2, 1},
                              {{Offer::trade(0, 10, 1, 10), {None, Accept, Decline}},
                               {Offer::trade(0, 10, 1, 6), {Decline, Decline, None}},
                               {Offer::pass(), {None, None, None}}}),
                  {}};
  f.expected = {
      {0, 0, Role::Proposer, RegretKind::NoRegret, 0, {}},
      {0, 1, Role::Acceptor, RegretKind::ForcedRegret, 80, {1}},
      {0, 2, Role::Decliner, RegretKind::NoRegret, -500, {}},
      {1, 2, Role::Proposer, RegretKind::Unscored, 0, {}},
      {1, 0, Role::Decliner, RegretKind::NoRegret, -40, {}},
      {1, 1, Role::Decliner, RegretKind::Unscored, 0, {}},
  };
  return f;
}

/// P1 declines 5 green for 5 red (+1.50) at turn 0 and nothing comparable
/// comes back.
inline RegretFixture unforced_regret() {
  using enum Response;
  using analytics::RegretKind;
  using analytics::Role;
  RegretFixture f{"unforced regret on declined profit",
                  fixture_log("fixture-unforced", {0, 1, 2},
                              {{Offer::trade(0, 5, 1, 5), {None, Decline, Decline}},
                               {Offer::pass(), {None, None, None}},
                               {Offer::pass(), {None, None, None}}}),
                  {}};
  f.expected = {
      {0, 0, Role::Proposer, RegretKind::Unscored, 0, {}},
      {0, 1, Role::Decliner, RegretKind::UnforcedRegret, 150, {}},
      {0, 2, Role::Decliner, RegretKind::NoRegret, -250, {}},
  };
  return f;
}

/// P0 buys 5 red for 5 green (+2.00) from P1; no better red offer follows.
inline RegretFixture no_regret() {
  using enum Response;
  using analytics::RegretKind;
  using analytics::Role;
  RegretFixture f{"no-regret optimal proposal",
                  fixture_log("fixture-none", {0, 1, 2},
                              {{Offer::trade(0, 5, 1, 5), {None, Accept, Decline}},
                               {Offer::pass(), {None, None, None}},
                               {Offer::pass(), {None, None, None}}}),
                  {}};
  f.expected = {
      {0, 0, Role::Proposer, RegretKind::NoRegret, 0, {}},
      {0, 1, Role::Acceptor, RegretKind::NoRegret, 0, {}},
      {0, 2, Role::Decliner, RegretKind::NoRegret, -250, {}},
  };
  return f;
}

inline std::vector<RegretFixture> regret_fixtures() { return {forced_regret(), unforced_regret(), no_regret()}; }

/// Empty string when the classifier output matches exactly, else a description
/// of the first mismatch.
inline std::string check_fixture(const RegretFixture& f) {
  const auto got = analytics::classify_actions(f.log);
  if (got.size() != f.expected.size())
    return f.name + ": expected " + std::to_string(f.expected.size()) + " labels, got " + std::to_string(got.size());
  for (const auto& e : f.expected) {
    const analytics::RegretLabel* hit = nullptr;
    for (const auto& g : got)
      if (g.turn == e.turn && g.player == e.player && g.role == e.role) hit = &g;
    const std::string where = f.name + " turn " + std::to_string(e.turn) + " player " + std::to_string(e.player);
    if (!hit) return where + ": missing label";
    if (hit->label != e.label)
      return where + ": expected " + std::string(to_string(e.label)) + ", got " + std::string(to_string(hit->label));
    if (hit->counterfactual_gain != e.counterfactual_gain)
      return where + ": counterfactual gain " + std::to_string(hit->counterfactual_gain);
    if (hit->evidence != e.evidence) return where + ": evidence differs";
    if (hit->label == analytics::RegretKind::Unscored && hit->reason.empty()) return where + ": unscored without reason";
  }
  return {};
}

}  // namespace bargain::fixtures
