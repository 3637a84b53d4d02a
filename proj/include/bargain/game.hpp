#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bargain/matrix.hpp"
#include "bargain/money.hpp"
#include "bargain/rng.hpp"

namespace bargain {

using Holdings = Matrix<int>;
using Valuations = Matrix<Cents>;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline constexpr std::string_view kChipColors[] = {"green", "red", "blue", "purple"};

struct GameConfig {
  int n_players = 3;
  std::vector<std::string> colors{"green", "red"};
  int numeraire = 0;  // index into colors
  int endowment_per_color = 10;
  Cents numeraire_value = 50;
  Cents private_value_low = 10;
  Cents private_value_high = 100;
  Cents value_grid_step = 5;
  int rounds = 3;
  std::uint64_t rng_seed = 0;

  /// Standard k-chip game: green numeraire plus the first k-1 of
  /// red, blue, purple.
  static GameConfig variant(int chips, std::uint64_t seed = 0) {
    if (chips < 2 || chips > 4) throw ConfigError("variant must be 2, 3 or 4 chips");
    GameConfig c;
    c.colors.assign(std::begin(kChipColors), std::begin(kChipColors) + chips);
    c.rng_seed = seed;
    return c;
  }

  int n_colors() const { return static_cast<int>(colors.size()); }
  int total_turns() const { return rounds * n_players; }
  int grid_size() const {
    return static_cast<int>((private_value_high - private_value_low) / value_grid_step) + 1;
  }
  Cents grid_value(int index) const { return private_value_low + index * value_grid_step; }

  std::vector<int> private_colors() const {
    std::vector<int> out;
    for (int c = 0; c < n_colors(); ++c)
      if (c != numeraire) out.push_back(c);
    return out;
  }

  std::optional<int> color_index(std::string_view name) const {
    for (int c = 0; c < n_colors(); ++c)
      if (colors[c] == name) return c;
    return std::nullopt;
  }

  void validate() const {
    if (n_players < 2) throw ConfigError("need at least two players");
    if (colors.size() < 2) throw ConfigError("need at least two chip colors");
    if (numeraire < 0 || numeraire >= n_colors()) throw ConfigError("numeraire index out of range");
    for (std::size_t i = 0; i < colors.size(); ++i)
      for (std::size_t j = i + 1; j < colors.size(); ++j)
        if (colors[i] == colors[j]) throw ConfigError("duplicate color " + colors[i]);
    if (endowment_per_color < 0) throw ConfigError("endowment must be non-negative");
    if (numeraire_value < 0) throw ConfigError("numeraire value must be non-negative");
    if (private_value_low < 0 || private_value_low >= private_value_high)
      throw ConfigError("private value bounds must satisfy 0 <= low < high");
    if (value_grid_step <= 0 || (private_value_high - private_value_low) % value_grid_step != 0)
      throw ConfigError("grid step must divide (high - low)");
    if (rounds < 1) throw ConfigError("rounds must be >= 1");
  }
};

/// A proposal: the proposer surrenders give_qty of give_color and
/// receives get_qty of get_color. Default-constructed value is Pass.
struct Offer {
  int give_color = -1;
  int give_qty = 0;
  int get_color = -1;
  int get_qty = 0;

  static constexpr Offer pass() { return {}; }
  static constexpr Offer trade(int give_color, int give_qty, int get_color, int get_qty) {
    return {give_color, give_qty, get_color, get_qty};
  }
  constexpr bool is_pass() const { return give_color < 0; }

  friend bool operator==(const Offer&, const Offer&) = default;
};

enum class Response : std::uint8_t { None, Accept, Decline };

enum class Violation { SameColor, InsufficientInventory, NonPositiveQty, OutOfTurn, UnknownColor };

inline std::string_view to_string(Violation v) {
  switch (v) {
    case Violation::SameColor: return "SameColor";
    case Violation::InsufficientInventory: return "InsufficientInventory";
    case Violation::NonPositiveQty: return "NonPositiveQty";
    case Violation::OutOfTurn: return "OutOfTurn";
    case Violation::UnknownColor: return "UnknownColor";
  }
  return "Unknown";
}

struct TurnRecord {
  int round = 0;
  int turn = 0;  // 0-based index over the whole game
  int proposer = 0;
  Offer offer;
  bool proposal_flagged = false;     // agent emitted an invalid proposal, replaced by Pass
  std::vector<Response> responses;   // effective responses, None for the proposer
  std::vector<bool> coerced;         // Accept coerced to Decline for lack of inventory
  std::optional<int> selected_acceptor;
  bool executed = false;
  Holdings pre_holdings;   // in-memory only; rebuilt when a log is loaded
  Holdings post_holdings;

  std::vector<int> accepters() const {
    std::vector<int> out;
    for (int p = 0; p < static_cast<int>(responses.size()); ++p)
      if (responses[p] == Response::Accept) out.push_back(p);
    return out;
  }
};

// ---------------------------------------------------------------------------
// Welfare accounting

inline Cents welfare(const Valuations& values, const Holdings& holdings, int player) {
  Cents w = 0;
  for (std::size_t c = 0; c < holdings.cols(); ++c) w += values(player, c) * holdings(player, c);
  return w;
}

inline Cents total_welfare(const Valuations& values, const Holdings& holdings) {
  Cents w = 0;
  for (std::size_t p = 0; p < holdings.rows(); ++p) w += welfare(values, holdings, static_cast<int>(p));
  return w;
}

/// Proposer's welfare change if the offer executes: v_get*get_qty - v_give*give_qty.
inline Cents proposer_delta(std::span<const Cents> proposer_values, const Offer& offer) {
  if (offer.is_pass()) throw std::invalid_argument("proposer_delta of a Pass offer");
  return proposer_values[offer.get_color] * offer.get_qty -
         proposer_values[offer.give_color] * offer.give_qty;
}

inline Cents proposer_delta(const Valuations& values, int proposer, const Offer& offer) {
  return proposer_delta(values.row(proposer), offer);
}

/// Acceptor's welfare change: receives give_qty of give_color, pays get_qty of get_color.
inline Cents responder_delta(std::span<const Cents> responder_values, const Offer& offer) {
  if (offer.is_pass()) throw std::invalid_argument("responder_delta of a Pass offer");
  return responder_values[offer.give_color] * offer.give_qty -
         responder_values[offer.get_color] * offer.get_qty;
}

inline Cents responder_delta(const Valuations& values, int responder, const Offer& offer) {
  return responder_delta(values.row(responder), offer);
}

/// Structural validity against a holdings row, ignoring turn order.
inline std::optional<Violation> check_offer(std::span<const int> proposer_holdings, const Offer& offer) {
  if (offer.is_pass()) return std::nullopt;
  const int n = static_cast<int>(proposer_holdings.size());
  if (offer.give_color >= n || offer.get_color < 0 || offer.get_color >= n) return Violation::UnknownColor;
  if (offer.give_color == offer.get_color) return Violation::SameColor;
  if (offer.give_qty < 1 || offer.get_qty < 1) return Violation::NonPositiveQty;
  if (proposer_holdings[offer.give_color] < offer.give_qty) return Violation::InsufficientInventory;
  return std::nullopt;
}

inline bool can_pay(std::span<const int> responder_holdings, const Offer& offer) {
  return !offer.is_pass() && responder_holdings[offer.get_color] >= offer.get_qty;
}

// Moves chips for an executed trade.
inline void execute_trade(Holdings& h, int proposer, int acceptor, const Offer& offer) {
  h(proposer, offer.give_color) -= offer.give_qty;
  h(acceptor, offer.give_color) += offer.give_qty;
  h(acceptor, offer.get_color) -= offer.get_qty;
  h(proposer, offer.get_color) += offer.get_qty;
}

// ---------------------------------------------------------------------------

struct SurplusGain {
  std::vector<Cents> per_player;
  Cents total = 0;
};

/// Game state machine. Single writer: every mutation goes through
/// apply_turn. RNG draw order is fixed: valuations (player-major, private
/// colors ascending), then turn order, then one draw per turn that has two
/// or more accepters.
class Game {
 public:
  explicit Game(const GameConfig& config) : config_(config), rng_(config.rng_seed) {
    config_.validate();
    const auto n = static_cast<std::size_t>(config_.n_players);
    const auto m = static_cast<std::size_t>(config_.n_colors());
    values_ = Valuations(n, m);
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t c = 0; c < m; ++c)
        values_(p, c) = static_cast<int>(c) == config_.numeraire
                            ? config_.numeraire_value
                            : config_.grid_value(static_cast<int>(rng_.below(config_.grid_size())));
    turn_order_.resize(n);
    std::iota(turn_order_.begin(), turn_order_.end(), 0);
    rng_.shuffle(std::span<int>(turn_order_));
    initial_ = Holdings(n, m, config_.endowment_per_color);
    holdings_ = initial_;
  }

  /// Rebuilds a recorded game's setup. The RNG is advanced exactly as in a
  /// fresh game so per-turn selection draws line up, then the recorded
  /// valuations and order replace the drawn ones.
  Game(const GameConfig& config, const Valuations& values, std::vector<int> turn_order) : Game(config) {
    if (values.rows() != values_.rows() || values.cols() != values_.cols())
      throw ConfigError("valuation profile shape does not match config");
    for (std::size_t p = 0; p < values.rows(); ++p) {
      if (values(p, config_.numeraire) != config_.numeraire_value)
        throw ConfigError("numeraire must be valued at numeraire_value for every player");
    }
    std::vector<int> sorted = turn_order;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < static_cast<int>(sorted.size()); ++i)
      if (sorted[i] != i || sorted.size() != values_.rows()) throw ConfigError("turn order is not a permutation");
    values_ = values;
    turn_order_ = std::move(turn_order);
  }

  const GameConfig& config() const { return config_; }
  const Valuations& valuations() const { return values_; }
  const Holdings& holdings() const { return holdings_; }
  const Holdings& initial_holdings() const { return initial_; }
  const std::vector<int>& turn_order() const { return turn_order_; }
  const std::vector<TurnRecord>& history() const { return history_; }

  int turns_played() const { return static_cast<int>(history_.size()); }
  bool is_terminal() const { return turns_played() >= config_.total_turns(); }
  int current_round() const { return turns_played() / config_.n_players; }
  int current_proposer() const {
    if (is_terminal()) throw ProtocolError("game is over");
    return turn_order_[turns_played() % config_.n_players];
  }

  std::optional<Violation> validate_offer(int proposer, const Offer& offer) const {
    if (is_terminal() || proposer != current_proposer()) return Violation::OutOfTurn;
    return check_offer(holdings_.row(proposer), offer);
  }

  bool responder_can_accept(int responder, const Offer& offer) const {
    return can_pay(holdings_.row(responder), offer);
  }

  /// Executes one turn. `responses` has one entry per player; the
  /// proposer's entry must be None. On a Pass, None is allowed everywhere.
  const TurnRecord& apply_turn(const Offer& offer, std::span<const Response> responses,
                               bool proposal_flagged = false) {
    const int proposer = current_proposer();
    if (auto v = validate_offer(proposer, offer))
      throw ProtocolError("invalid offer: " + std::string(to_string(*v)));
    if (static_cast<int>(responses.size()) != config_.n_players)
      throw ProtocolError("responses must cover every player");
    if (responses[proposer] != Response::None) throw ProtocolError("proposer cannot respond to own offer");

    TurnRecord rec;
    rec.round = current_round();
    rec.turn = turns_played();
    rec.proposer = proposer;
    rec.offer = offer;
    rec.proposal_flagged = proposal_flagged;
    rec.responses.assign(responses.begin(), responses.end());
    rec.coerced.assign(responses.size(), false);
    rec.pre_holdings = holdings_;

    for (int p = 0; p < config_.n_players; ++p) {
      if (p == proposer) continue;
      if (responses[p] == Response::None && !offer.is_pass())
        throw ProtocolError("missing response from player " + std::to_string(p));
      if (responses[p] == Response::Accept && !responder_can_accept(p, offer)) {
        rec.responses[p] = Response::Decline;
        rec.coerced[p] = true;
      }
    }

    const auto accepters = rec.accepters();
    if (!offer.is_pass() && !accepters.empty()) {
      const int acceptor = accepters.size() == 1 ? accepters.front()
                                                 : accepters[rng_.below(accepters.size())];
      execute_trade(holdings_, proposer, acceptor, offer);
      rec.selected_acceptor = acceptor;
      rec.executed = true;
    }
    rec.post_holdings = holdings_;
    history_.push_back(std::move(rec));
    return history_.back();
  }

  Cents welfare_of(int player) const { return welfare(values_, holdings_, player); }

  SurplusGain surplus_gain() const {
    SurplusGain g;
    for (int p = 0; p < config_.n_players; ++p) {
      g.per_player.push_back(welfare(values_, holdings_, p) - welfare(values_, initial_, p));
      g.total += g.per_player.back();
    }
    return g;
  }

 private:
  GameConfig config_;
  Rng rng_;
  Valuations values_;
  std::vector<int> turn_order_;
  Holdings initial_;
  Holdings holdings_;
  std::vector<TurnRecord> history_;
};

inline Game new_game(const GameConfig& config) { return Game(config); }

}  // namespace bargain
