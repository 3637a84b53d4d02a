#include <gtest/gtest.h>

#include <set>
#include <tuple>

#include "bargain/agent.hpp"
#include "bargain/analytics/regret.hpp"
#include "fixtures.hpp"

using namespace bargain;
using namespace bargain::analytics;
using namespace bargain::testing_support;

namespace {

GameLog random_log(std::uint64_t seed) {
  Game g(GameConfig::variant(2 + static_cast<int>(seed % 3), seed));
  Rng rng(seed * 17 + 3);
  while (!g.is_terminal()) {
    const Offer o = random_offer(g, rng);
    g.apply_turn(o, random_responses(g, o, rng));
  }
  return log_from(g, "r" + std::to_string(seed), {"random", "random", "random"});
}

}  // namespace

TEST(RegretFixtures, ForcedRegret) { EXPECT_EQ(fixtures::check_fixture(fixtures::forced_regret()), ""); }
TEST(RegretFixtures, UnforcedRegret) { EXPECT_EQ(fixtures::check_fixture(fixtures::unforced_regret()), ""); }
TEST(RegretFixtures, NoRegret) { EXPECT_EQ(fixtures::check_fixture(fixtures::no_regret()), ""); }

TEST(RegretFixtures, SurviveSerialization) {
  for (const auto& f : fixtures::regret_fixtures()) {
    auto copy = f;
    copy.log = read_logs(log_to_string(f.log)).front();
    EXPECT_EQ(fixtures::check_fixture(copy), "") << f.name;
  }
}

TEST(Counterfactual, IdentityReplayMatchesRecord) {
  for (std::uint64_t s = 0; s < 300; ++s) {
    const auto log = random_log(s);
    for (int p = 0; p < 3; ++p) {
      const auto path = actual_path(log, p);
      ASSERT_EQ(path.holdings.size(), log.turns.size() + 1);
      EXPECT_EQ(path.holdings.front(), log.header.initial);
      for (std::size_t k = 0; k < log.turns.size(); ++k) {
        EXPECT_EQ(path.holdings[k + 1], log.turns[k].post_holdings);
        EXPECT_EQ(path.executed[k], log.turns[k].executed);
        EXPECT_FALSE(path.dropped[k]);
        EXPECT_EQ(path.values[k + 1], welfare(log.header.valuations, log.turns[k].post_holdings, p));
      }
    }
  }
}

TEST(Counterfactual, DeclineInsteadHandsTradeToOtherAccepter) {
  // Both responders accept; whoever was selected flips to decline.
  Game g(GameConfig::variant(2, 3), fixtures::fixture_values(), {0, 1, 2});
  g.apply_turn(Offer::trade(0, 1, 1, 1), responses({N, A, A}));
  const auto log = log_from(g, "two", {"x", "x", "x"});
  const int chosen = *log.turns[0].selected_acceptor;
  const int other = 3 - chosen;
  const auto path = counterfactual_replay(log, 0, chosen, Alternative::DeclineInstead);
  EXPECT_TRUE(path.executed[0]);
  EXPECT_EQ(path.holdings[1](other, 1), 9);
  EXPECT_EQ(path.holdings[1](chosen, 1), 10);
  // Flipping the unselected accepter leaves the trade unchanged.
  const auto same = counterfactual_replay(log, 0, other, Alternative::DeclineInstead);
  EXPECT_EQ(same.holdings[1], log.turns[0].post_holdings);
}

TEST(Counterfactual, LaterTradesDropWhenNoLongerFeasible) {
  // P1 sells 4 red for 10 green at turn 0, then spends 15 green at turn 1.
  Game g(GameConfig::variant(2, 3), fixtures::fixture_values(), {0, 1, 2});
  g.apply_turn(Offer::trade(0, 10, 1, 4), responses({N, A, D}));
  g.apply_turn(Offer::trade(0, 15, 1, 10), responses({A, N, D}));
  const auto log = log_from(g, "drop", {"x", "x", "x"});
  ASSERT_TRUE(log.turns[0].executed && log.turns[1].executed);
  const auto cf = counterfactual_replay(log, 0, 1, Alternative::DeclineInstead);
  EXPECT_FALSE(cf.executed[0]);
  EXPECT_FALSE(cf.executed[1]);
  EXPECT_TRUE(cf.dropped[1]);
  EXPECT_EQ(cf.holdings.back(), log.header.initial);
  const auto pass = counterfactual_replay(log, 0, 0, Alternative::PassInstead);
  EXPECT_TRUE(pass.dropped[1]);
}

TEST(Counterfactual, InvalidSubstitutions) {
  const auto f = fixtures::forced_regret();
  // P1 had no red at turn 1.
  EXPECT_THROW(counterfactual_replay(f.log, 1, 1, Alternative::AcceptInstead), CounterfactualError);
  EXPECT_THROW(counterfactual_replay(f.log, 0, 2, Alternative::DeclineInstead), CounterfactualError);
  EXPECT_THROW(counterfactual_replay(f.log, 0, 1, Alternative::PassInstead), CounterfactualError);
  EXPECT_THROW(counterfactual_replay(f.log, 2, 0, Alternative::AcceptInstead), CounterfactualError);
  EXPECT_THROW(counterfactual_replay(f.log, 9, 0, Alternative::PassInstead), CounterfactualError);
}

TEST(RegretProperties, LabelsAreWellFormed) {
  for (std::uint64_t s = 0; s < 300; ++s) {
    const auto log = random_log(s);
    const auto labels = classify_actions(log);
    std::set<std::tuple<int, int>> seen;
    for (const auto& l : labels) {
      EXPECT_TRUE(seen.insert({l.turn, l.player}).second) << "duplicate label";
      if (l.role == Role::Decliner) EXPECT_NE(l.label, RegretKind::ForcedRegret);
      if (l.label == RegretKind::Unscored) EXPECT_FALSE(l.reason.empty());
      if (l.label == RegretKind::UnforcedRegret) EXPECT_GE(l.counterfactual_gain, 1);
      for (int k : l.evidence) EXPECT_GT(k, l.turn);
    }
    // Every participant of every non-Pass turn is labelled.
    std::size_t expected = 0;
    for (const auto& t : log.turns)
      if (!t.offer.is_pass()) expected += 1 + t.accepters().size() +
                                         std::count(t.responses.begin(), t.responses.end(), Response::Decline);
    EXPECT_EQ(labels.size(), expected);
  }
}

TEST(RegretProperties, ValuationOverride) {
  const auto f = fixtures::unforced_regret();
  // If P1 valued red at 0.60 the declined offer would have lost 0.50.
  auto v = f.log.header.valuations;
  v(1, 1) = 60;
  const auto labels = classify_actions(f.log, &v);
  for (const auto& l : labels)
    if (l.player == 1) {
      EXPECT_EQ(l.label, RegretKind::NoRegret);
      EXPECT_EQ(l.counterfactual_gain, -50);
    }
}
