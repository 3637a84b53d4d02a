// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "bargain/analytics/complexity.hpp"
#include "bargain/analytics/regret.hpp"
#include "bargain/analytics/trade_space.hpp"
#include "bargain/harness.hpp"
#include "bargain/pareto.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace bargain;
using namespace bargain::testing_support;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& why) {
    if (!ok && pass) {
      pass = false;
      detail = why;
    }
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---------------------------------------------------------------------------

Verdict lp_oracle_agreement() {
  Verdict v;
  Rng rng(20240601);
  double worst_gap = 1.0;
  for (int k = 0; k < 500; ++k) {
    const int m = 2 + k % 3;
    Valuations values(3, m);
    Holdings initial(3, m, 0);
    for (int i = 0; i < 3; ++i) {
      values(i, 0) = 50;
      for (int c = 1; c < m; ++c) values(i, c) = 10 + 5 * static_cast<Cents>(rng.below(19));
    }
    for (int c = 0; c < m; ++c) {
      const int total = 1 + static_cast<int>(rng.below(4));
      for (int q = 0; q < total; ++q) ++initial(rng.below(3), c);
    }
    const auto lp = optimal_allocation(values, initial);
    v.require(lp.optimal(), fmt("instance %d: solver status %s", k, std::string(lp::to_string(lp.status)).c_str()));
    const auto oracle = static_cast<double>(integer_oracle(values, initial));
    const double gap = (lp.w_star_cents - oracle) / std::max(oracle, 1.0);
    worst_gap = std::min(worst_gap, gap);
    v.require(gap >= -1e-6, fmt("instance %d: LP %.6f below oracle %.0f", k, lp.w_star_cents, oracle));
  }
  for (int k = 0; k < 20; ++k) {
    const int m = 2 + k % 3;
    Valuations values(3, m);
    std::vector<Cents> row(m, 50);
    for (int c = 1; c < m; ++c) row[c] = 10 + 5 * static_cast<Cents>(rng.below(19));
    Holdings initial(3, m, 0);
    for (int i = 0; i < 3; ++i)
      for (int c = 0; c < m; ++c) {
        values(i, c) = row[c];
        initial(i, c) = static_cast<int>(rng.below(5));
      }
    const auto lp = optimal_allocation(values, initial);
    const double initial_dollars = static_cast<double>(total_welfare(values, initial)) / 100.0;
    v.require(lp.w_star == initial_dollars,
              fmt("identical valuations %d: w* %.6f != initial %.6f", k, lp.w_star, initial_dollars));
  }
  if (v.pass) v.detail = fmt("500 instances, worst relative gap %+.2e; identical-valuation cases exact", worst_gap);
  return v;
}

Verdict complexity_reproduction() {
  Verdict v;
  const double target[] = {37.1, 120.7, 250.7};
  std::string out;
  for (int variant = 2; variant <= 4; ++variant) {
    const auto e = analytics::expected_rational_trades(GameConfig::variant(variant), 20000, 2024);
    const double t = target[variant - 2];
    out += fmt("%s%d-chip %.1f (se %.2f)", out.empty() ? "" : ", ", variant, e.mean, e.se);
    v.require(std::abs(e.mean - t) <= 0.10 * t, fmt("%d-chip estimate %.2f outside 10%% of %.1f", variant, e.mean, t));
  }
  if (v.pass) v.detail = out + " over 20000 samples";
  return v;
}

struct Populations {
  std::vector<GameLog> bayesian[3], random[3], greedy[3];
};

Populations play_populations() {
  Populations p;
  for (int variant = 2; variant <= 4; ++variant) {
    ExperimentSpec spec;
    spec.variant = variant;
    spec.n_games = 200;
    spec.master_seed = 1000 + static_cast<std::uint64_t>(variant);
    p.bayesian[variant - 2] = run_batch(spec).logs;
    p.random[variant - 2] = replicate(p.bayesian[variant - 2], {"random", "random", "random"}).logs;
    p.greedy[variant - 2] = replicate(p.bayesian[variant - 2], {"greedy", "greedy", "greedy"}).logs;
  }
  return p;
}

Verdict bayesian_surplus(const Populations& pop) {
  Verdict v;
  const double target[] = {0.74, 0.80, 0.73};
  std::string out;
  for (int k = 0; k < 3; ++k) {
    const auto b = summarize(pop.bayesian[k]);
    const auto r = summarize(pop.random[k]);
    double highest = -1e9;
    for (const auto& log : pop.bayesian[k]) highest = std::max(highest, outcome_of(log).scaled.value);
    out += fmt("%s%d-chip %.3f (se %.3f, random %.3f)", out.empty() ? "" : ", ", k + 2, b.scaled_surplus.mean,
               b.scaled_surplus.se, r.scaled_surplus.mean);
    v.require(std::abs(b.scaled_surplus.mean - target[k]) <= 0.10,
              fmt("%d-chip mean %.3f outside 0.10 of %.2f", k + 2, b.scaled_surplus.mean, target[k]));
    v.require(b.scaled_surplus.mean > 0, fmt("%d-chip mean not positive", k + 2));
    v.require(highest <= 1.0 + 1e-9, fmt("%d-chip game above 1 (%.6f)", k + 2, highest));
    v.require(b.scaled_surplus.mean > r.scaled_surplus.mean,
              fmt("%d-chip mean %.3f not above random_rational %.3f", k + 2, b.scaled_surplus.mean,
                  r.scaled_surplus.mean));
  }
  v.detail = v.pass ? out : v.detail + "; " + out;
  return v;
}

Verdict trade_space_signature(const Populations& pop) {
  Verdict v;
  std::string out;
  for (int k = 0; k < 3; ++k) {
    const auto b = analytics::trade_space(pop.bayesian[k]);
    const auto g = analytics::trade_space(pop.greedy[k]);
    v.require(b.summaries.size() == 1 && g.summaries.size() == 1, "unexpected population grouping");
    if (!v.pass) break;
    const auto& bs = b.summaries[0];
    const auto& gs = g.summaries[0];
    out += fmt("%s%d-chip ratio %.3f, rejection %.2f vs greedy %.2f", out.empty() ? "" : "; ", k + 2,
               bs.accepted.ratio.mean, bs.rejection_rate, gs.rejection_rate);
    v.require(bs.nonpositive_proposals == 0, fmt("%d-chip: %zu non-positive proposals", k + 2, bs.nonpositive_proposals));
    v.require(bs.accepted.ratio.n > 0 && bs.accepted.ratio.mean < 1.0,
              fmt("%d-chip accepted ratio mean %.3f", k + 2, bs.accepted.ratio.mean));
    v.require(bs.rejection_rate > gs.rejection_rate,
              fmt("%d-chip rejection %.3f not above greedy %.3f", k + 2, bs.rejection_rate, gs.rejection_rate));
  }
  if (v.pass) v.detail = out;
  return v;
}

/// Records what each responder could see when it was asked.
class ProbeAgent final : public Agent {
 public:
  explicit ProbeAgent(std::uint64_t seed) : inner_(seed) {}
  Offer propose(const Observation& obs) override { return inner_.propose(obs); }
  Response respond(const Observation& obs, const Offer& offer) override {
    if (static_cast<int>(obs.history.size()) != obs.turn) ++leaks;
    return inner_.respond(obs, offer);
  }
  std::string_view kind() const override { return "probe"; }
  int leaks = 0;

 private:
  RandomRationalAgent inner_;
};

Verdict engine_invariants() {
  Verdict v;
  long violations = 0;
  auto check = [&](bool ok) { violations += !ok; };
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const int variant = 2 + static_cast<int>(s % 3);
    const auto cfg = GameConfig::variant(variant, split_seed(99, s));
    auto run = [&](Game& g) {
      Rng rng(split_seed(77, s));
      std::vector<int> proposals(3, 0);
      Holdings prev = g.holdings();
      while (!g.is_terminal()) {
        const Offer o = random_offer(g, rng);
        const auto rs = random_responses(g, o, rng);
        const auto& rec = g.apply_turn(o, rs);
        ++proposals[rec.proposer];
        for (int c = 0; c < variant; ++c) check(g.holdings().column_sum(c) == 3 * cfg.endowment_per_color);
        for (int x : g.holdings().data()) check(x >= 0);
        check(rec.executed == (!o.is_pass() && !rec.accepters().empty()));
        if (rec.executed) check(rs[*rec.selected_acceptor] == Response::Accept && !rec.coerced[*rec.selected_acceptor]);
        for (int j = 0; j < 3; ++j)
          if (rec.coerced[j]) check(rs[j] == Response::Accept && !can_pay(prev.row(j), o));
        int changed = 0;
        for (std::size_t i = 0; i < prev.data().size(); ++i) changed += prev.data()[i] != g.holdings().data()[i];
        check(changed == (rec.executed ? 4 : 0));
        prev = g.holdings();
      }
      check(g.turns_played() == cfg.total_turns());
      check(proposals == std::vector<int>(3, cfg.rounds));
    };
    Game a(cfg), b(cfg);
    run(a);
    run(b);
    check(log_to_string(log_from(a, "x", {"r", "r", "r"})) == log_to_string(log_from(b, "x", {"r", "r", "r"})));
  }
  // Responders decide without seeing each other's answers.
  int leaks = 0;
  for (std::uint64_t s = 0; s < 500; ++s) {
    Game g(GameConfig::variant(2 + static_cast<int>(s % 3), s));
    ProbeAgent p0(s), p1(s + 1), p2(s + 2);
    Agent* agents[] = {&p0, &p1, &p2};
    play_game(g, agents);
    leaks += p0.leaks + p1.leaks + p2.leaks;
  }
  v.require(violations == 0, fmt("%ld invariant violations", violations));
  v.require(leaks == 0, fmt("%d responses saw the current turn", leaks));
  if (v.pass) v.detail = "10000 random action streams plus 500 driver games, 0 violations";
  return v;
}

Verdict belief_consistency() {
  Verdict v;
  long pruned = 0, resets = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    Game g(GameConfig::variant(2 + static_cast<int>(s % 3), split_seed(4242, s)));
    std::vector<std::unique_ptr<BayesianAgent>> agents;
    std::vector<Agent*> raw;
    for (int p = 0; p < 3; ++p) {
      agents.push_back(std::make_unique<BayesianAgent>(g.config(), p));
      raw.push_back(agents.back().get());
    }
    while (!g.is_terminal()) {
      play_turn(g, raw);
      for (int p = 0; p < 3; ++p)
        for (int j = 0; j < 3; ++j)
          if (j != p) pruned += !agents[p]->beliefs()[j]->contains(g.valuations().row(j));
    }
    for (const auto& a : agents) resets += static_cast<long>(a->misspecifications().size());
  }
  v.require(pruned == 0, fmt("true valuation pruned %ld times", pruned));
  v.require(resets == 0, fmt("%ld misspecification resets", resets));
  if (v.pass) v.detail = "1000 all-Bayesian games, truth never pruned, 0 resets";
  return v;
}

Verdict regret_fixtures() {
  Verdict v;
  for (const auto& f : fixtures::regret_fixtures()) {
    const auto err = fixtures::check_fixture(f);
    v.require(err.empty(), err);
  }
  long forced_decliners = 0, replay_mismatch = 0;
  for (std::uint64_t s = 0; s < 500; ++s) {
    Game g(GameConfig::variant(2 + static_cast<int>(s % 3), s));
    Rng rng(s + 1);
    while (!g.is_terminal()) {
      const Offer o = random_offer(g, rng);
      g.apply_turn(o, random_responses(g, o, rng));
    }
    const auto log = log_from(g, "r", {"r", "r", "r"});
    for (const auto& l : analytics::classify_actions(log))
      forced_decliners += l.role == analytics::Role::Decliner && l.label == analytics::RegretKind::ForcedRegret;
    for (int p = 0; p < 3; ++p) {
      const auto path = analytics::actual_path(log, p);
      for (std::size_t k = 0; k < log.turns.size(); ++k)
        replay_mismatch += !(path.holdings[k + 1] == log.turns[k].post_holdings);
    }
  }
  v.require(forced_decliners == 0, fmt("%ld decliners labelled forced regret", forced_decliners));
  v.require(replay_mismatch == 0, fmt("%ld identity-replay mismatches", replay_mismatch));
  if (v.pass) v.detail = "3 fixtures exact; 500 random logs: no forced-regret decliners, identity replay exact";
  return v;
}

Verdict eq1_equivalence() {
  Verdict v;
  int checked = 0, nonpass = 0;
  for (std::uint64_t s = 0; checked < 100; ++s) {
    Game g(GameConfig::variant(2, split_seed(808, s)));
    std::vector<std::unique_ptr<BayesianAgent>> agents;
    std::vector<Agent*> raw;
    for (int p = 0; p < 3; ++p) {
      agents.push_back(std::make_unique<BayesianAgent>(g.config(), p));
      raw.push_back(agents.back().get());
    }
    const int stop = static_cast<int>(s % 9);
    while (g.turns_played() < stop) play_turn(g, raw);
    const int p = g.current_proposer();
    const auto obs = observation_for(g, p);
    const Offer got = bayesian_propose(obs, agents[p]->beliefs());
    const auto want = oracle::eq1_argmax(obs, agents[p]->beliefs());
    v.require(got == want.offer, fmt("observation %d: agent and enumeration disagree", checked));
    nonpass += !got.is_pass();
    ++checked;
  }
  if (v.pass) v.detail = fmt("100 observations agree (%d non-Pass)", nonpass);
  return v;
}

}  // namespace

int main() {
  using clock = std::chrono::steady_clock;
  int failures = 0;
  auto report = [&](int id, const char* name, double limit_s, const std::function<Verdict()>& fn) {
    const auto t0 = clock::now();
    Verdict v = fn();
    const double secs = std::chrono::duration<double>(clock::now() - t0).count();
    if (limit_s > 0 && secs > limit_s) {
      v.pass = false;
      v.detail = fmt("took %.1f s, limit %.0f s; ", secs, limit_s) + v.detail;
    }
    failures += !v.pass;
    std::printf("%s %d %s: %s [%.2f s]\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str(), secs);
    std::fflush(stdout);
  };

  report(1, "lp-oracle agreement", 10, lp_oracle_agreement);
  report(2, "expected rational trades", 60, complexity_reproduction);
  Populations pop;
  report(3, "bayesian self-play surplus", 300, [&] {
    pop = play_populations();
    return bayesian_surplus(pop);
  });
  report(4, "bayesian trade-space signature", 0, [&] { return trade_space_signature(pop); });
  report(5, "engine invariants", 0, engine_invariants);
  report(6, "belief consistency", 0, belief_consistency);
  report(7, "regret fixtures", 0, regret_fixtures);
  report(8, "proposal objective equivalence", 0, eq1_equivalence);
  return failures ? 1 : 0;
}
