#pragma once

#include <cstdint>
#include <cstdio>
#include <functional>
#include <memory>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bargain/agent.hpp"
#include "bargain/analytics/stats.hpp"
#include "bargain/bayesian.hpp"
#include "bargain/game_log.hpp"
#include "bargain/pareto.hpp"

namespace bargain {

/// Builds the agent for an `llm:<profile>` seat.
using LlmFactory = std::function<std::unique_ptr<Agent>(const std::string& profile, int seat)>;

struct AgentOptions {
  LlmFactory llm;
  BayesianOptions bayesian;
};

/// Seat specs: bayesian, greedy, random, llm:<profile>. `seed` feeds
/// stochastic agents.
inline std::unique_ptr<Agent> make_agent(std::string_view spec, const GameConfig& config, int seat,
                                         std::uint64_t seed, const AgentOptions& opts = {}) {
  if (spec == "bayesian") return std::make_unique<BayesianAgent>(config, seat, opts.bayesian);
  if (spec == "greedy") return std::make_unique<GreedyConcessionaryAgent>();
  if (spec == "random") return std::make_unique<RandomRationalAgent>(seed);
  if (spec.starts_with("llm:")) {
    if (!opts.llm) throw ConfigError("llm seats need a model transport");
    return opts.llm(std::string(spec.substr(4)), seat);
  }
  if (spec == "human") throw ConfigError("human seats are only available in the play service");
  throw ConfigError("unknown agent spec '" + std::string(spec) + "'");
}

/// Seed for seat `seat`'s agent in a game with seed `game_seed`.
inline std::uint64_t agent_seed(std::uint64_t game_seed, int seat) {
  return split_seed(game_seed, static_cast<std::uint64_t>(seat) + 1);
}

struct ExperimentSpec {
  int variant = 2;
  std::vector<std::string> seats{"bayesian", "bayesian", "bayesian"};
  int n_games = 1;
  std::uint64_t master_seed = 0;

  void validate() const {
    if (variant < 2 || variant > 4) throw ConfigError("variant must be 2, 3 or 4");
    if (seats.size() != 3) throw ConfigError("exactly 3 seats are required");
    if (n_games < 1) throw ConfigError("n_games must be at least 1");
  }
};

inline std::vector<std::string> split_seats(std::string_view csv) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = csv.find(',', start);
    out.emplace_back(csv.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::string game_id_for(int variant, int index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "v%d-%05d", variant, index);
  return buf;
}

struct GameOutcome {
  ParetoResult pareto;
  ScaledSurplus scaled;
  int flags = 0;
};

inline GameOutcome outcome_of(const GameLog& log) {
  GameOutcome o;
  o.pareto = optimal_allocation(log.header.valuations, log.header.initial);
  o.scaled = scaled_surplus(log.header.valuations, log.final_holdings(), log.header.initial, o.pareto);
  for (const auto& seat : log.header.meta.value("flags", json::array())) o.flags += seat.get<int>();
  return o;
}

struct BatchSummary {
  std::string population;
  int variant = 0;
  analytics::Describe scaled_surplus;
  int degenerate_games = 0;
  int flagged_decisions = 0;
  int misspecifications = 0;

  json to_json() const {
    return {{"population", population},
            {"variant", variant},
            {"n_games", scaled_surplus.n},
            {"scaled_surplus",
             {{"mean", scaled_surplus.mean},
              {"sd", scaled_surplus.sd},
              {"se", scaled_surplus.se},
              {"median", scaled_surplus.median}}},
            {"degenerate_games", degenerate_games},
            {"flagged_decisions", flagged_decisions},
            {"misspecifications", misspecifications}};
  }
};

inline BatchSummary summarize(std::span<const GameLog> logs) {
  BatchSummary s;
  std::vector<double> xs;
  for (const auto& log : logs) {
    if (s.population.empty()) {
      s.population = log.header.population();
      s.variant = log.header.variant();
    }
    const auto o = outcome_of(log);
    xs.push_back(o.scaled.value);
    s.degenerate_games += o.scaled.degenerate;
    s.flagged_decisions += o.flags;
    s.misspecifications += log.header.meta.value("misspecifications", 0);
  }
  s.scaled_surplus = analytics::describe(xs);
  return s;
}

struct BatchResult {
  std::vector<GameLog> logs;
  BatchSummary summary;
};

/// Plays one game to completion with the given seat specs and records
/// per-seat flags and belief resets in the header meta.
inline GameLog play_seats(Game& game, const std::vector<std::string>& seats, std::string game_id,
                          const AgentOptions& opts, json meta = json::object()) {
  const auto seed = game.config().rng_seed;
  std::vector<std::unique_ptr<Agent>> agents;
  for (int p = 0; p < static_cast<int>(seats.size()); ++p)
    agents.push_back(make_agent(seats[p], game.config(), p, agent_seed(seed, p), opts));
  play_game(game, agents);
  json flags = json::array();
  int resets = 0;
  for (const auto& a : agents) {
    flags.push_back(a->flags());
    if (const auto* b = dynamic_cast<const BayesianAgent*>(a.get()))
      resets += static_cast<int>(b->misspecifications().size());
  }
  meta["flags"] = flags;
  meta["misspecifications"] = resets;
  auto log = log_from(game, std::move(game_id), seats);
  log.header.meta = std::move(meta);
  return log;
}

/// Game k uses seed split_seed(master_seed, k); logs are streamed to `out`
/// (when given) in game-index order.
inline BatchResult run_batch(const ExperimentSpec& spec, std::ostream* out = nullptr, const AgentOptions& opts = {}) {
  spec.validate();
  BatchResult res;
  for (int k = 0; k < spec.n_games; ++k) {
    const auto seed = split_seed(spec.master_seed, static_cast<std::uint64_t>(k));
    Game game(GameConfig::variant(spec.variant, seed));
    auto log = play_seats(game, spec.seats, game_id_for(spec.variant, k), opts,
                          {{"master_seed", spec.master_seed}, {"game_index", k}});
    if (out) {
      write_log(*out, log);
      if (!*out) throw std::runtime_error("failed writing game log");
    }
    res.logs.push_back(std::move(log));
  }
  res.summary = summarize(res.logs);
  return res;
}

/// Re-runs each source game with `seats` under the identical valuations,
/// endowments, turn order and game seed.
inline BatchResult replicate(std::span<const GameLog> source, const std::vector<std::string>& seats,
                             std::ostream* out = nullptr, const AgentOptions& opts = {}) {
  if (seats.size() != 3) throw ConfigError("exactly 3 seats are required");
  BatchResult res;
  for (const auto& src : source) {
    const auto& h = src.header;
    if (h.config.n_players != static_cast<int>(seats.size()))
      throw LogError("source game " + h.game_id + " has a different player count");
    Game game(h.config, h.valuations, h.turn_order);
    if (!(game.initial_holdings() == h.initial))
      throw LogError("source game " + h.game_id + " endowment does not match its config");
    json meta = h.meta;
    meta["source_population"] = h.population();
    auto log = play_seats(game, seats, h.game_id, opts, std::move(meta));
    if (out) {
      write_log(*out, log);
      if (!*out) throw std::runtime_error("failed writing game log");
    }
    res.logs.push_back(std::move(log));
  }
  res.summary = summarize(res.logs);
  return res;
}

}  // namespace bargain
