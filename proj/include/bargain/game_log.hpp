#pragma once

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bargain/game.hpp"

namespace bargain {

using json = nlohmann::json;

inline constexpr int kLogSchema = 1;

class LogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GameHeader {
  std::string game_id;
  std::vector<std::string> seats;  // agent spec per player id
  GameConfig config;
  Valuations valuations;
  std::vector<int> turn_order;
  Holdings initial;
  // Free-form annotations (e.g. source game id for replicas).
  json meta = json::object();

  std::string population() const {
    std::string out;
    for (std::size_t i = 0; i < seats.size(); ++i) out += (i ? "," : "") + seats[i];
    return out;
  }
  int variant() const { return config.n_colors(); }
};

struct GameLog {
  GameHeader header;
  std::vector<TurnRecord> turns;

  Holdings final_holdings() const { return turns.empty() ? header.initial : turns.back().post_holdings; }
};

namespace detail {

template <typename T>
json matrix_to_json(const Matrix<T>& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(std::vector<T>(m.row(r).begin(), m.row(r).end()));
  return rows;
}

template <typename T>
Matrix<T> matrix_from_json(const json& j, std::size_t rows, std::size_t cols, const char* what) {
  if (!j.is_array() || j.size() != rows) throw LogError(std::string(what) + ": wrong row count");
  Matrix<T> m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) throw LogError(std::string(what) + ": wrong column count");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<T>();
  }
  return m;
}

inline std::string_view response_name(Response r) {
  switch (r) {
    case Response::Accept: return "accept";
    case Response::Decline: return "decline";
    default: return "none";
  }
}

inline Response response_from(const json& j) {
  if (j.is_null()) return Response::None;
  const auto s = j.get<std::string>();
  if (s == "accept") return Response::Accept;
  if (s == "decline") return Response::Decline;
  if (s == "none") return Response::None;
  throw LogError("unknown response '" + s + "'");
}

}  // namespace detail

inline json config_to_json(const GameConfig& c) {
  return {{"n_players", c.n_players},
          {"colors", c.colors},
          {"numeraire", c.colors[c.numeraire]},
          {"endowment_per_color", c.endowment_per_color},
          {"numeraire_value_cents", c.numeraire_value},
          {"private_value_low_cents", c.private_value_low},
          {"private_value_high_cents", c.private_value_high},
          {"value_grid_step_cents", c.value_grid_step},
          {"rounds", c.rounds},
          {"rng_seed", c.rng_seed}};
}

inline GameConfig config_from_json(const json& j) {
  try {
    GameConfig c;
    c.n_players = j.at("n_players").get<int>();
    c.colors = j.at("colors").get<std::vector<std::string>>();
    const auto num = c.color_index(j.at("numeraire").get<std::string>());
    if (!num) throw LogError("numeraire color not among colors");
    c.numeraire = *num;
    c.endowment_per_color = j.at("endowment_per_color").get<int>();
    c.numeraire_value = j.at("numeraire_value_cents").get<Cents>();
    c.private_value_low = j.at("private_value_low_cents").get<Cents>();
    c.private_value_high = j.at("private_value_high_cents").get<Cents>();
    c.value_grid_step = j.at("value_grid_step_cents").get<Cents>();
    c.rounds = j.at("rounds").get<int>();
    c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw LogError(std::string("bad config: ") + e.what());
  }
}

inline json offer_to_json(const Offer& o, const GameConfig& c) {
  if (o.is_pass()) return {{"pass", true}};
  return {{"give", {{"color", c.colors[o.give_color]}, {"qty", o.give_qty}}},
          {"get", {{"color", c.colors[o.get_color]}, {"qty", o.get_qty}}}};
}

inline Offer offer_from_json(const json& j, const GameConfig& c) {
  if (j.value("pass", false)) return Offer::pass();
  try {
    const auto give = c.color_index(j.at("give").at("color").get<std::string>());
    const auto get = c.color_index(j.at("get").at("color").get<std::string>());
    if (!give || !get) throw LogError("offer references unknown color");
    return Offer::trade(*give, j.at("give").at("qty").get<int>(), *get, j.at("get").at("qty").get<int>());
  } catch (const json::exception& e) {
    throw LogError(std::string("bad offer: ") + e.what());
  }
}

inline json header_to_json(const GameHeader& h) {
  return {{"schema", kLogSchema},
          {"type", "header"},
          {"game_id", h.game_id},
          {"seats", h.seats},
          {"config", config_to_json(h.config)},
          {"seed", h.config.rng_seed},
          {"valuations_cents", detail::matrix_to_json(h.valuations)},
          {"turn_order", h.turn_order},
          {"initial_holdings", detail::matrix_to_json(h.initial)},
          {"meta", h.meta}};
}

inline json turn_to_json(const TurnRecord& r, const GameConfig& c) {
  json responses = json::array();
  for (auto resp : r.responses)
    responses.push_back(resp == Response::None ? json(nullptr) : json(detail::response_name(resp)));
  return {{"schema", kLogSchema},
          {"type", "turn"},
          {"round", r.round},
          {"turn", r.turn},
          {"proposer", r.proposer},
          {"offer", offer_to_json(r.offer, c)},
          {"proposal_flagged", r.proposal_flagged},
          {"responses", responses},
          {"coerced", r.coerced},
          {"selected_acceptor", r.selected_acceptor ? json(*r.selected_acceptor) : json(nullptr)},
          {"executed", r.executed},
          {"post_holdings", detail::matrix_to_json(r.post_holdings)}};
}

inline GameHeader header_from(const Game& game, std::string game_id, std::vector<std::string> seats) {
  return {std::move(game_id), std::move(seats), game.config(), game.valuations(), game.turn_order(),
          game.initial_holdings(), json::object()};
}

inline GameLog log_from(const Game& game, std::string game_id, std::vector<std::string> seats) {
  return {header_from(game, std::move(game_id), std::move(seats)), game.history()};
}

/// One header line followed by one line per turn.
inline void write_log(std::ostream& os, const GameLog& log) {
  os << header_to_json(log.header).dump() << '\n';
  for (const auto& t : log.turns) os << turn_to_json(t, log.header.config).dump() << '\n';
}

inline std::string log_to_string(const GameLog& log) {
  std::ostringstream os;
  write_log(os, log);
  return os.str();
}

inline GameHeader header_from_json(const json& j) {
  if (j.value("schema", 0) != kLogSchema) throw LogError("unsupported schema version");
  if (j.value("type", "") != "header") throw LogError("expected header line");
  GameHeader h;
  h.config = config_from_json(j.at("config"));
  const auto n = static_cast<std::size_t>(h.config.n_players);
  const auto m = static_cast<std::size_t>(h.config.n_colors());
  h.game_id = j.value("game_id", "");
  h.seats = j.value("seats", std::vector<std::string>{});
  h.valuations = detail::matrix_from_json<Cents>(j.at("valuations_cents"), n, m, "valuations_cents");
  h.turn_order = j.at("turn_order").get<std::vector<int>>();
  h.initial = j.contains("initial_holdings")
                  ? detail::matrix_from_json<int>(j.at("initial_holdings"), n, m, "initial_holdings")
                  : Holdings(n, m, h.config.endowment_per_color);
  h.meta = j.value("meta", json::object());
  return h;
}

inline TurnRecord turn_from_json(const json& j, const GameHeader& h, const Holdings& pre) {
  if (j.value("schema", 0) != kLogSchema) throw LogError("unsupported schema version");
  if (j.value("type", "") != "turn") throw LogError("expected turn line");
  const auto n = static_cast<std::size_t>(h.config.n_players);
  const auto m = static_cast<std::size_t>(h.config.n_colors());
  TurnRecord r;
  try {
    r.round = j.at("round").get<int>();
    r.turn = j.at("turn").get<int>();
    r.proposer = j.at("proposer").get<int>();
    r.offer = offer_from_json(j.at("offer"), h.config);
    r.proposal_flagged = j.value("proposal_flagged", false);
    for (const auto& resp : j.at("responses")) r.responses.push_back(detail::response_from(resp));
    r.coerced = j.value("coerced", std::vector<bool>(n, false));
    if (!j.at("selected_acceptor").is_null()) r.selected_acceptor = j.at("selected_acceptor").get<int>();
    r.executed = j.at("executed").get<bool>();
  } catch (const json::exception& e) {
    throw LogError(std::string("bad turn record: ") + e.what());
  }
  if (r.responses.size() != n || r.coerced.size() != n) throw LogError("responses must cover every player");
  if (r.proposer < 0 || r.proposer >= static_cast<int>(n)) throw LogError("proposer out of range");
  if (r.executed != r.selected_acceptor.has_value()) throw LogError("executed flag disagrees with acceptor");
  r.pre_holdings = pre;
  r.post_holdings = detail::matrix_from_json<int>(j.at("post_holdings"), n, m, "post_holdings");
  return r;
}

/// Reads every game in a JSONL stream. Blank lines are skipped.
inline std::vector<GameLog> read_logs(std::istream& is) {
  std::vector<GameLog> logs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw LogError("line " + std::to_string(lineno) + ": " + e.what());
    }
    try {
      if (j.value("type", "") == "header") {
        logs.push_back({header_from_json(j), {}});
      } else {
        if (logs.empty()) throw LogError("turn record before any header");
        auto& log = logs.back();
        log.turns.push_back(turn_from_json(j, log.header, log.final_holdings()));
      }
    } catch (const LogError& e) {
      throw LogError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const json::exception& e) {
      throw LogError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return logs;
}

inline std::vector<GameLog> read_logs(const std::string& text) {
  std::istringstream is(text);
  return read_logs(is);
}

}  // namespace bargain
