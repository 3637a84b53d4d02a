#pragma once

#include <initializer_list>
#include <vector>

#include "bargain/game.hpp"
#include "bargain/game_log.hpp"

namespace bargain::testing_support {

inline Valuations values_of(std::initializer_list<std::initializer_list<Cents>> rows) {
  Valuations v(rows.size(), rows.begin()->size());
  std::size_t r = 0;
  for (const auto& row : rows) {
    std::size_t c = 0;
    for (Cents x : row) v(r, c++) = x;
    ++r;
  }
  return v;
}

inline Holdings holdings_of(std::initializer_list<std::initializer_list<int>> rows) {
  Holdings h(rows.size(), rows.begin()->size());
  std::size_t r = 0;
  for (const auto& row : rows) {
    std::size_t c = 0;
    for (int x : row) h(r, c++) = x;
    ++r;
  }
  return h;
}

inline Game fixed_game(int variant, const Valuations& values, std::vector<int> order = {0, 1, 2},
                       std::uint64_t seed = 1) {
  return Game(GameConfig::variant(variant, seed), values, std::move(order));
}

inline std::vector<Response> responses(std::initializer_list<Response> rs) { return rs; }

constexpr Response A = Response::Accept;
constexpr Response D = Response::Decline;
constexpr Response N = Response::None;

/// Any structurally valid offer for the current proposer, or Pass.
inline Offer random_offer(const Game& g, Rng& rng) {
  if (rng.below(6) == 0) return Offer::pass();
  const int m = g.config().n_colors();
  const int p = g.current_proposer();
  const int give = static_cast<int>(rng.below(m));
  int get = static_cast<int>(rng.below(m - 1));
  if (get >= give) ++get;
  const int have = g.holdings()(p, give);
  if (have == 0) return Offer::pass();
  return Offer::trade(give, 1 + static_cast<int>(rng.below(have)), get, 1 + static_cast<int>(rng.below(12)));
}

/// Random responses, including accepts the responder cannot afford.
inline std::vector<Response> random_responses(const Game& g, const Offer& o, Rng& rng) {
  std::vector<Response> rs(g.config().n_players, Response::None);
  if (o.is_pass()) return rs;
  for (int j = 0; j < g.config().n_players; ++j)
    if (j != g.current_proposer()) rs[j] = rng.below(2) ? Response::Accept : Response::Decline;
  return rs;
}

}  // namespace bargain::testing_support
