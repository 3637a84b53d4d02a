#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <thread>

#include "bargain/service/http.hpp"
#include "support.hpp"

using namespace bargain;
using namespace bargain::service;
using namespace std::chrono_literals;

namespace {

/// Agents for `llm:<name>` seats: "ask15" always asks for 15 red for 1
/// green (nobody can pay), "yes" proposes Pass and accepts everything.
AgentOptions scripted_agents() {
  AgentOptions o;
  o.llm = [](const std::string& name, int) -> std::unique_ptr<Agent> {
    if (name == "ask15") return std::make_unique<ScriptedAgent>(std::deque<Offer>(3, Offer::trade(0, 1, 1, 15)),
                                                                std::deque<Response>{});
    return std::make_unique<ScriptedAgent>(std::deque<Offer>{}, std::deque<Response>(9, Response::Accept));
  };
  return o;
}

ServiceConfig fast_config() {
  ServiceConfig c;
  c.agent_delay = 0ms;
  c.agents = scripted_agents();
  return c;
}

Session make_session(std::vector<std::string> seats, std::uint64_t seed, AgentOptions agents = {}) {
  return Session("t", 2, std::move(seats), seed, SessionOptions{0ms, std::move(agents), {}});
}

/// Human passes on its turns and declines everything.
void play_passively(Session& s) {
  while (!s.ended()) {
    if (s.phase() == Phase::YourProposal)
      s.submit_proposal(Offer::pass());
    else if (s.phase() == Phase::YourResponse)
      s.submit_response(false);
    else
      FAIL() << "session stuck in phase " << to_string(s.phase());
  }
}

std::uint64_t seed_where(auto&& pred) {
  for (std::uint64_t s = 0;; ++s)
    if (pred(Game(GameConfig::variant(2, s)))) return s;
}

}  // namespace

TEST(Session, SeededSessionsAreDeterministic) {
  Session a = make_session({"human", "bayesian", "bayesian"}, 42);
  Session b = make_session({"human", "bayesian", "bayesian"}, 42);
  play_passively(a);
  play_passively(b);
  ASSERT_EQ(a.last_seq(), b.last_seq());
  for (std::size_t k = 0; k < a.last_seq(); ++k)
    EXPECT_EQ(a.events_since(k).front().body, b.events_since(k).front().body);
}

TEST(Session, MatchesHeadlessGame) {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
    Session s = make_session({"bayesian", "human", "random"}, seed);
    play_passively(s);
    Game g(GameConfig::variant(2, seed));
    std::vector<std::unique_ptr<Agent>> agents;
    agents.push_back(make_agent("bayesian", g.config(), 0, agent_seed(seed, 0)));
    agents.push_back(std::make_unique<ScriptedAgent>(std::deque<Offer>{}, std::deque<Response>{}));
    agents.push_back(make_agent("random", g.config(), 2, agent_seed(seed, 2)));
    play_game(g, agents);
    ASSERT_EQ(s.game().history().size(), g.history().size());
    for (std::size_t k = 0; k < g.history().size(); ++k) {
      EXPECT_EQ(s.game().history()[k].offer, g.history()[k].offer);
      EXPECT_EQ(s.game().history()[k].responses, g.history()[k].responses);
      EXPECT_EQ(s.game().history()[k].post_holdings, g.history()[k].post_holdings);
    }
  }
}

TEST(Session, ViewIsPrivate) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Session s = make_session({"bayesian", "bayesian", "human"}, seed);
    while (!s.ended()) {
      const auto v = s.view();
      EXPECT_EQ(v["seat"], 2);
      EXPECT_EQ(v["own_values_cents"]["red"], s.game().valuations()(2, 1));
      EXPECT_EQ(v["own_values_cents"].size(), 2u);
      const auto text = v.dump();
      EXPECT_EQ(text.find("valuations"), std::string::npos);
      EXPECT_EQ(text.find("\"accept\""), std::string::npos);
      EXPECT_EQ(text.find("\"decline\""), std::string::npos);
      if (s.phase() == Phase::YourResponse) {
        // Agent responses to this offer are not revealed yet.
        const auto evs = s.events_since(0);
        EXPECT_EQ(evs.back().body["type"], "ProposalMade");
        s.submit_response(false);
      } else {
        s.submit_proposal(Offer::pass());
      }
    }
    EXPECT_TRUE(s.view().contains("payout_cents"));
  }
}

TEST(Session, PreviewShowsValueChange) {
  // Giving one red worth 0.70 for one green changes value by -0.20.
  const auto seed = seed_where([](const Game& g) {
    return g.valuations()(0, 1) == 70 && g.turn_order()[0] == 0;
  });
  Session s = make_session({"human", "bayesian", "bayesian"}, seed);
  const auto p = s.preview(Offer::trade(1, 1, 0, 1));
  EXPECT_EQ(p["valid"], true);
  EXPECT_EQ(p["value_change_cents"], -20);
  EXPECT_EQ(p["value_change"], "-0.20");
  EXPECT_EQ(p["projected_value_cents"], 500 + 700 - 20);
  const auto bad = s.preview(Offer::trade(1, 11, 0, 1));
  EXPECT_EQ(bad["valid"], false);
  EXPECT_EQ(bad["reason"], "InsufficientInventory");
  EXPECT_EQ(s.preview(Offer::trade(1, 1, 1, 1))["reason"], "SameColor");
}

TEST(Session, ErrorCodes) {
  const auto seed = seed_where([](const Game& g) { return g.turn_order()[0] == 1; });
  Session s = make_session({"llm:ask15", "human", "llm:yes"}, seed, scripted_agents());
  // Turn 0 is the human's proposal.
  ASSERT_EQ(s.phase(), Phase::YourProposal);
  try {
    s.submit_response(true);
    FAIL();
  } catch (const ServiceError& e) {
    EXPECT_EQ(e.status(), 409);
  }
  try {
    s.submit_proposal(Offer::trade(0, 11, 1, 1));
    FAIL();
  } catch (const ServiceError& e) {
    EXPECT_EQ(e.status(), 422);
    EXPECT_EQ(e.code(), "InsufficientInventory");
  }
  try {
    s.submit_proposal(Offer::trade(0, 1, 0, 1));
    FAIL();
  } catch (const ServiceError& e) {
    EXPECT_EQ(e.code(), "SameColor");
  }
  s.submit_proposal(Offer::trade(0, 1, 1, 1));  // "yes" accepts
  EXPECT_EQ(s.game().history()[0].executed, true);
  // Play on until the 15-red request reaches the human.
  while (s.phase() != Phase::YourResponse) s.submit_proposal(Offer::pass());
  const auto v = s.view();
  EXPECT_EQ(v["active_offer"]["can_accept"], false);
  try {
    s.submit_response(true);
    FAIL();
  } catch (const ServiceError& e) {
    EXPECT_EQ(e.status(), 422);
    EXPECT_EQ(e.code(), "InsufficientInventory");
  }
  try {
    s.submit_proposal(Offer::pass());
    FAIL();
  } catch (const ServiceError& e) {
    EXPECT_EQ(e.status(), 409);
  }
  s.submit_response(false);
}

TEST(Session, EventStream) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    Session s = make_session({"human", "bayesian", "random"}, seed);
    play_passively(s);
    const auto evs = s.events_since(0);
    ASSERT_FALSE(evs.empty());
    int turn = -1;
    std::string prev;
    for (std::size_t k = 0; k < evs.size(); ++k) {
      const auto& b = evs[k].body;
      EXPECT_EQ(evs[k].seq, k + 1);
      EXPECT_EQ(b["seq"], k + 1);
      const std::string type = b["type"];
      if (type == "TurnOpened") {
        EXPECT_EQ(b["turn"], ++turn);
        EXPECT_TRUE(prev.empty() || prev == "TradeExecuted" || prev == "TradeFailed");
      } else if (type == "ProposalMade") {
        EXPECT_EQ(prev, "TurnOpened");
      } else if (type == "ResponsesRevealed") {
        EXPECT_EQ(prev, "ProposalMade");
      } else if (type == "TradeExecuted" || type == "TradeFailed") {
        EXPECT_TRUE(prev == "ResponsesRevealed" || (type == "TradeFailed" && b["reason"] == "pass"));
      } else {
        EXPECT_EQ(type, "GameEnded");
        EXPECT_EQ(k + 1, evs.size());
      }
      prev = type;
    }
    EXPECT_EQ(turn, 8);
    EXPECT_EQ(s.events_since(evs.size() - 2).size(), 2u);
    EXPECT_TRUE(s.events_since(evs.size()).empty());
  }
}

TEST(SessionManager, CreateAndValidate) {
  SessionManager mgr(fast_config());
  const auto v = mgr.create({{"variant", 3}, {"seed", 9}});
  EXPECT_EQ(v["seed"], 9);
  EXPECT_EQ(v["variant"], 3);
  EXPECT_EQ(mgr.size(), 1u);
  auto status_of = [&](const json& req) {
    try {
      mgr.create(req);
    } catch (const ServiceError& e) {
      return e.status();
    }
    return 200;
  };
  EXPECT_EQ(status_of({{"variant", 7}}), 400);
  EXPECT_EQ(status_of({{"seats", {"bayesian", "bayesian", "bayesian"}}}), 400);
  EXPECT_EQ(status_of({{"seats", {"human", "human", "bayesian"}}}), 400);
  EXPECT_EQ(status_of({{"agents", {"bayesian", "oracle"}}}), 400);
  EXPECT_EQ(status_of({{"seed", "abc"}}), 400);
  try {
    mgr.view("nope");
    FAIL();
  } catch (const ServiceError& e) {
    EXPECT_EQ(e.status(), 404);
  }
}

TEST(SessionManager, IdleSessionsAreAbandonedAndLogged) {
  const auto path = std::filesystem::temp_directory_path() / "bargain_service_test.jsonl";
  std::filesystem::remove(path);
  auto cfg = fast_config();
  cfg.ttl = 1min;
  cfg.log_path = path.string();
  SessionManager mgr(cfg);
  const std::string id = mgr.create({{"seed", 3}})["session_id"];
  EXPECT_EQ(mgr.expire_idle(Clock::now()), 0);
  EXPECT_EQ(mgr.expire_idle(Clock::now() + 2min), 1);
  const auto v = mgr.view(id);
  EXPECT_EQ(v["phase"], "ended");
  EXPECT_EQ(v["abandoned"], true);
  const auto evs = mgr.events(id, 0)["events"];
  EXPECT_EQ(evs.back()["type"], "GameEnded");
  EXPECT_EQ(evs.back()["abandoned"], true);
  try {
    mgr.propose(id, Offer::pass());
    FAIL();
  } catch (const ServiceError& e) {
    EXPECT_EQ(e.status(), 409);
  }
  std::ifstream in(path);
  const auto logs = read_logs(in);
  ASSERT_EQ(logs.size(), 1u);
  EXPECT_EQ(logs[0].header.game_id, id);
  EXPECT_EQ(logs[0].header.meta["abandoned"], true);
  std::filesystem::remove(path);
}

TEST(Http, RoutesEndToEnd) {
  SessionManager mgr(fast_config());
  httplib::Server server;
  install_routes(server, mgr);
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  httplib::Client cli("127.0.0.1", port);
  const auto seed = seed_where([](const Game& g) { return g.turn_order()[0] == 0; });
  auto created = cli.Post("/sessions", json{{"seed", seed}, {"agents", {"llm:yes", "llm:ask15"}}}.dump(),
                          "application/json");
  ASSERT_TRUE(created);
  ASSERT_EQ(created->status, 200);
  const auto v = json::parse(created->body);
  const std::string id = v["session_id"];
  EXPECT_EQ(v["phase"], "your_proposal");

  auto get = [&](const std::string& path) {
    auto r = cli.Get(path);
    EXPECT_TRUE(r);
    return std::make_pair(r->status, json::parse(r->body));
  };
  auto post = [&](const std::string& path, const json& body) {
    auto r = cli.Post(path, body.dump(), "application/json");
    EXPECT_TRUE(r);
    return std::make_pair(r->status, json::parse(r->body));
  };

  EXPECT_EQ(get("/sessions/" + id + "/view").first, 200);
  EXPECT_EQ(get("/sessions/zzz/view").first, 404);
  EXPECT_EQ(get("/sessions/zzz/view").second["error"], "not_found");

  const std::string offer = R"({"give":{"color":"green","qty":1},"get":{"color":"red","qty":1}})";
  const auto pv = get("/sessions/" + id + "/preview?offer=" + httplib::detail::encode_query_param(offer));
  EXPECT_EQ(pv.first, 200);
  EXPECT_EQ(pv.second["valid"], true);
  EXPECT_EQ(get("/sessions/" + id + "/preview").first, 400);

  EXPECT_EQ(post("/sessions/" + id + "/response", {{"accept", true}}).first, 409);
  const auto bad = post("/sessions/" + id + "/proposal", json::parse(R"({"give":{"color":"gold","qty":1},"get":{"color":"red","qty":1}})"));
  EXPECT_EQ(bad.first, 422);
  EXPECT_EQ(post("/sessions/" + id + "/proposal", {{"give", {{"color", "green"}, {"qty", 99}}}, {"get", {{"color", "red"}, {"qty", 1}}}})
                .second["error"],
            "InsufficientInventory");

  const auto ok = post("/sessions/" + id + "/proposal", {{"offer", json::parse(offer)}});
  ASSERT_EQ(ok.first, 200);
  EXPECT_GE(ok.second["events"].size(), 3u);
  EXPECT_EQ(ok.second["events"][0]["type"], "ProposalMade");

  auto r = cli.Post("/sessions/" + id + "/response", "not json", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);

  const auto evs = get("/sessions/" + id + "/events?since=2");
  EXPECT_EQ(evs.second["events"][0]["seq"], 3);
  EXPECT_EQ(get("/sessions/" + id + "/events?since=x").first, 400);

  // Finish the game through the API.
  for (int guard = 0; guard < 20; ++guard) {
    const auto view = get("/sessions/" + id + "/view").second;
    if (view["phase"] == "ended") break;
    if (view["phase"] == "your_response")
      post("/sessions/" + id + "/response", {{"choice", "decline"}});
    else
      post("/sessions/" + id + "/proposal", {{"pass", true}});
  }
  const auto end = get("/sessions/" + id + "/view").second;
  EXPECT_EQ(end["phase"], "ended");
  EXPECT_TRUE(end.contains("payout_cents"));

  server.stop();
  t.join();
}
