#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "bargain/game_log.hpp"
#include "bargain/harness.hpp"

namespace bargain::service {

inline constexpr int kApiSchema = 1;

/// Request failure carrying an HTTP-style status and a stable reason code.
class ServiceError : public std::runtime_error {
 public:
  ServiceError(int status, std::string code, const std::string& message)
      : std::runtime_error(message), status_(status), code_(std::move(code)) {}
  int status() const { return status_; }
  const std::string& code() const { return code_; }

 private:
  int status_;
  std::string code_;
};

inline ServiceError not_found(const std::string& what) { return {404, "not_found", what}; }
inline ServiceError conflict(const std::string& what) { return {409, "out_of_turn", what}; }
inline ServiceError bad_request(const std::string& what) { return {400, "bad_request", what}; }

enum class Phase { YourProposal, YourResponse, Waiting, Ended };

inline std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::YourProposal: return "your_proposal";
    case Phase::YourResponse: return "your_response";
    case Phase::Waiting: return "waiting";
    case Phase::Ended: return "ended";
  }
  return "?";
}

struct Event {
  std::uint64_t seq;
  json body;
};

using Clock = std::chrono::steady_clock;

struct SessionOptions {
  std::chrono::milliseconds agent_delay{800};
  AgentOptions agents;
  std::function<void(const GameLog&)> on_end;  // called once when the game finishes
};

/// One live game with a single human seat. Not thread-safe on its own;
/// SessionManager serializes access per session.
class Session {
 public:
  Session(std::string id, int variant, std::vector<std::string> seats, std::uint64_t seed, SessionOptions opts)
      : id_(std::move(id)),
        seats_(std::move(seats)),
        game_(GameConfig::variant(variant, seed)),
        opts_(std::move(opts)) {
    int humans = 0;
    for (int p = 0; p < static_cast<int>(seats_.size()); ++p) {
      if (seats_[p] == "human") {
        human_ = p;
        ++humans;
        agents_.push_back(nullptr);
      } else {
        agents_.push_back(make_agent(seats_[p], game_.config(), p, agent_seed(seed, p), opts_.agents));
      }
    }
    if (seats_.size() != 3 || humans != 1) throw ConfigError("a session needs 3 seats with exactly one human");
    advance();
  }

  const std::string& id() const { return id_; }
  const Game& game() const { return game_; }
  int human() const { return human_; }
  bool ended() const { return ended_; }
  bool abandoned() const { return abandoned_; }
  std::uint64_t last_seq() const { return events_.size(); }

  Phase phase() const {
    if (ended_) return Phase::Ended;
    if (awaiting_proposal_) return Phase::YourProposal;
    if (pending_) return Phase::YourResponse;
    return Phase::Waiting;
  }

  std::vector<Event> events_since(std::uint64_t since) const {
    std::vector<Event> out;
    for (std::uint64_t s = since; s < events_.size(); ++s) out.push_back(events_[s]);
    return out;
  }

  /// Everything the human may see: own valuations, the public holdings
  /// table and ledger position. Never other players' valuations or
  /// unrevealed responses.
  json view() const {
    const auto& c = game_.config();
    json values = json::object();
    for (int k = 0; k < c.n_colors(); ++k) values[c.colors[k]] = game_.valuations()(human_, k);
    json v{{"schema", kApiSchema},
           {"session_id", id_},
           {"seat", human_},
           {"variant", c.n_colors()},
           {"colors", c.colors},
           {"own_values_cents", values},
           {"holdings", detail::matrix_to_json(game_.holdings())},
           {"turn_order", game_.turn_order()},
           {"round", game_.current_round()},
           {"turn", game_.turns_played()},
           {"total_turns", c.total_turns()},
           {"phase", to_string(phase())},
           {"last_seq", last_seq()},
           {"abandoned", abandoned_}};
    if (pending_) {
      const auto& o = pending_->offer;
      v["active_offer"] = {{"proposer", game_.current_proposer()},
                           {"offer", offer_to_json(o, c)},
                           {"can_accept", game_.responder_can_accept(human_, o)},
                           {"value_change_cents", responder_delta(game_.valuations(), human_, o)}};
    }
    if (ended_) v["payout_cents"] = game_.surplus_gain().per_player[human_];
    return v;
  }

  /// Projected change in the human's holdings value if `offer` were
  /// executed with the human as proposer.
  json preview(const Offer& offer) const {
    json out{{"schema", kApiSchema}};
    const auto& row = game_.holdings().row(human_);
    if (const auto bad = check_offer(row, offer)) {
      out["valid"] = false;
      out["reason"] = to_string(*bad);
      return out;
    }
    const Cents delta = offer.is_pass() ? 0 : proposer_delta(game_.valuations(), human_, offer);
    out["valid"] = true;
    out["value_change_cents"] = delta;
    out["value_change"] = format_signed_dollars(delta);
    out["projected_value_cents"] = game_.welfare_of(human_) + delta;
    return out;
  }

  void submit_proposal(const Offer& offer) {
    touch();
    if (!awaiting_proposal_) throw conflict("it is not your turn to propose");
    if (const auto bad = game_.validate_offer(human_, offer)) throw ServiceError(422, std::string(to_string(*bad)), "invalid offer");
    awaiting_proposal_ = false;
    open_offer(offer, false);
    advance();
  }

  void submit_response(bool accept) {
    touch();
    if (!pending_) throw conflict("no offer is awaiting your response");
    if (accept && !game_.responder_can_accept(human_, pending_->offer))
      throw ServiceError(422, std::string(to_string(Violation::InsufficientInventory)),
                         "you cannot fulfil this offer");
    auto p = std::move(*pending_);
    pending_.reset();
    p.responses[human_] = accept ? Response::Accept : Response::Decline;
    finish_turn(p);
    advance();
  }

  /// Ends an idle game as abandoned. Returns true if it was still running.
  bool abandon() {
    if (ended_) return false;
    pending_.reset();
    awaiting_proposal_ = false;
    abandoned_ = true;
    end_game();
    return true;
  }

  Clock::time_point last_activity() const { return last_activity_; }
  void touch(Clock::time_point now = Clock::now()) { last_activity_ = now; }

 private:
  struct Pending {
    Offer offer;
    bool flagged = false;
    std::vector<Response> responses;
  };

  void emit(json body) {
    body["seq"] = events_.size() + 1;
    events_.push_back({events_.size() + 1, std::move(body)});
  }

  void pause() const {
    if (opts_.agent_delay.count() > 0) std::this_thread::sleep_for(opts_.agent_delay);
  }

  // Auto-plays agent decisions until the human must act or the game ends.
  void advance() {
    while (!ended_) {
      if (game_.is_terminal()) {
        end_game();
        return;
      }
      if (opened_turn_ != game_.turns_played()) {
        opened_turn_ = game_.turns_played();
        emit({{"type", "TurnOpened"},
              {"round", game_.current_round()},
              {"turn", game_.turns_played()},
              {"proposer", game_.current_proposer()}});
      }
      if (pending_) return;
      const int proposer = game_.current_proposer();
      if (proposer == human_) {
        awaiting_proposal_ = true;
        return;
      }
      pause();
      const auto [offer, flagged] = solicit_proposal(game_, *agents_[proposer]);
      open_offer(offer, flagged);
    }
  }

  // Records the proposal and gathers agent responses; the turn completes
  // now unless the human must respond.
  void open_offer(const Offer& offer, bool flagged) {
    const auto& c = game_.config();
    const int proposer = game_.current_proposer();
    emit({{"type", "ProposalMade"}, {"turn", game_.turns_played()}, {"proposer", proposer},
          {"offer", offer_to_json(offer, c)}});
    Pending p{offer, flagged, std::vector<Response>(c.n_players, Response::None)};
    if (!offer.is_pass()) {
      for (int j = 0; j < c.n_players; ++j)
        if (j != proposer && j != human_) p.responses[j] = solicit_response(game_, *agents_[j], j, offer);
      if (proposer != human_) {
        pending_ = std::move(p);
        return;
      }
    }
    finish_turn(p);
  }

  void finish_turn(const Pending& p) {
    const auto& c = game_.config();
    const auto& rec = game_.apply_turn(p.offer, p.responses, p.flagged);
    for (int j = 0; j < c.n_players; ++j)
      if (agents_[j]) agents_[j]->observe(observation_for(game_, j), rec);
    if (!rec.offer.is_pass()) {
      json rs = json::array();
      for (const auto r : rec.responses) rs.push_back(r == Response::None ? json(nullptr) : json(bargain::detail::response_name(r)));
      emit({{"type", "ResponsesRevealed"}, {"turn", rec.turn}, {"responses", rs}, {"coerced", rec.coerced}});
    }
    if (rec.executed)
      emit({{"type", "TradeExecuted"}, {"turn", rec.turn}, {"proposer", rec.proposer},
            {"acceptor", *rec.selected_acceptor}, {"offer", offer_to_json(rec.offer, c)},
            {"holdings", detail::matrix_to_json(rec.post_holdings)}});
    else
      emit({{"type", "TradeFailed"}, {"turn", rec.turn}, {"proposer", rec.proposer},
            {"reason", rec.offer.is_pass() ? "pass" : "no_acceptor"}});
  }

  void end_game() {
    ended_ = true;
    const auto gain = game_.surplus_gain();
    const json per_player = gain.per_player;
    emit({{"type", "GameEnded"},
          {"abandoned", abandoned_},
          {"holdings", detail::matrix_to_json(game_.holdings())},
          {"surplus_gain_cents", per_player},
          {"total_surplus_gain_cents", gain.total},
          {"payout_cents", per_player[human_]}});
    if (opts_.on_end) {
      auto log = log_from(game_, id_, seats_);
      log.header.meta = {{"abandoned", abandoned_}, {"human_seat", human_}};
      opts_.on_end(log);
    }
  }

  std::string id_;
  std::vector<std::string> seats_;
  Game game_;
  SessionOptions opts_;
  std::vector<std::unique_ptr<Agent>> agents_;
  int human_ = -1;
  std::vector<Event> events_;
  std::optional<Pending> pending_;
  bool awaiting_proposal_ = false;
  bool ended_ = false;
  bool abandoned_ = false;
  int opened_turn_ = -1;
  Clock::time_point last_activity_ = Clock::now();
};

struct ServiceConfig {
  std::chrono::minutes ttl{60};
  std::chrono::milliseconds agent_delay{800};
  std::vector<std::string> default_agents{"bayesian", "bayesian"};
  std::string log_path;  // finished games are appended here as JSONL when set
  AgentOptions agents;
};

/// Owns all live sessions. Every operation locks the session it touches,
/// so human actions and agent auto-play for one session never interleave.
class SessionManager {
 public:
  explicit SessionManager(ServiceConfig cfg = {}) : cfg_(std::move(cfg)) {}

  /// `request` fields: variant (2-4), optional seats (3 specs, one
  /// "human") or agents (2 specs, human takes seat 0), optional seed.
  json create(const json& request) {
    expire_idle();
    int variant = 0;
    std::vector<std::string> seats;
    std::uint64_t seed = 0;
    try {
      variant = request.value("variant", 2);
      if (request.contains("seats")) {
        seats = request.at("seats").get<std::vector<std::string>>();
      } else {
        seats = {"human"};
        const auto agents = request.value("agents", cfg_.default_agents);
        seats.insert(seats.end(), agents.begin(), agents.end());
      }
      seed = request.contains("seed") ? request.at("seed").get<std::uint64_t>() : fresh_seed();
    } catch (const json::exception& e) {
      throw bad_request(e.what());
    }
    std::shared_ptr<Entry> entry;
    std::string id;
    {
      std::lock_guard lock(mu_);
      id = "s" + std::to_string(++counter_);
    }
    SessionOptions opts{cfg_.agent_delay, cfg_.agents, {}};
    if (!cfg_.log_path.empty()) opts.on_end = [this](const GameLog& log) { append_log(log); };
    try {
      entry = std::make_shared<Entry>(id, variant, seats, seed, std::move(opts));
    } catch (const ConfigError& e) {
      throw bad_request(e.what());
    }
    std::lock_guard slock(entry->mu);
    {
      std::lock_guard lock(mu_);
      sessions_[id] = entry;
    }
    auto v = entry->session.view();
    v["seed"] = seed;
    return v;
  }

  template <typename Fn>
  auto with_session(const std::string& id, Fn&& fn) {
    expire_idle();
    std::shared_ptr<Entry> e;
    {
      std::lock_guard lock(mu_);
      const auto it = sessions_.find(id);
      if (it == sessions_.end()) throw not_found("unknown session " + id);
      e = it->second;
    }
    std::lock_guard slock(e->mu);
    return fn(e->session);
  }

  json view(const std::string& id) {
    return with_session(id, [](Session& s) { return s.view(); });
  }

  json preview(const std::string& id, const Offer& offer) {
    return with_session(id, [&](Session& s) { return s.preview(offer); });
  }

  json propose(const std::string& id, const Offer& offer) {
    return with_session(id, [&](Session& s) {
      const auto since = s.last_seq();
      s.submit_proposal(offer);
      return action_reply(s, since);
    });
  }

  json respond(const std::string& id, bool accept) {
    return with_session(id, [&](Session& s) {
      const auto since = s.last_seq();
      s.submit_response(accept);
      return action_reply(s, since);
    });
  }

  json events(const std::string& id, std::uint64_t since) {
    return with_session(id, [&](Session& s) {
      json evs = json::array();
      for (auto& e : s.events_since(since)) evs.push_back(std::move(e.body));
      return json{{"schema", kApiSchema}, {"events", evs}, {"last_seq", s.last_seq()}};
    });
  }

  /// Abandons sessions idle longer than the TTL. Returns how many ended.
  int expire_idle(Clock::time_point now = Clock::now()) {
    std::vector<std::shared_ptr<Entry>> all;
    {
      std::lock_guard lock(mu_);
      for (auto& [_, e] : sessions_) all.push_back(e);
    }
    int n = 0;
    for (auto& e : all) {
      std::unique_lock slock(e->mu, std::try_to_lock);
      if (!slock.owns_lock()) continue;
      if (!e->session.ended() && now - e->session.last_activity() > cfg_.ttl) n += e->session.abandon();
    }
    return n;
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return sessions_.size();
  }

  const ServiceConfig& config() const { return cfg_; }

 private:
  struct Entry {
    template <typename... A>
    explicit Entry(A&&... args) : session(std::forward<A>(args)...) {}
    std::mutex mu;
    Session session;
  };

  static json action_reply(const Session& s, std::uint64_t since) {
    json evs = json::array();
    for (auto& e : s.events_since(since)) evs.push_back(std::move(e.body));
    return {{"schema", kApiSchema}, {"events", evs}, {"view", s.view()}};
  }

  std::uint64_t fresh_seed() {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }

  void append_log(const GameLog& log) {
    std::lock_guard lock(log_mu_);
    std::ofstream os(cfg_.log_path, std::ios::app);
    write_log(os, log);
  }

  ServiceConfig cfg_;
  mutable std::mutex mu_;
  std::mutex log_mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::uint64_t counter_ = 0;
};

}  // namespace bargain::service
