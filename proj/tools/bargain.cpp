// Command-line front end: batch simulation, replication, analysis, LP
// optima, offer-space estimates and the play server.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bargain/analytics/complexity.hpp"
#include "bargain/analytics/regret.hpp"
#include "bargain/analytics/trade_space.hpp"
#include "bargain/analytics/trajectory.hpp"
#include "bargain/harness.hpp"
#include "bargain/llm/http_transport.hpp"
#include "bargain/llm/llm_agent.hpp"
#include "bargain/service/http.hpp"

namespace fs = std::filesystem;
using namespace bargain;

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  return os;
}

// A batch that fails midway leaves its completed games in <out>.partial.
void mark_partial(const std::string& path) {
  std::error_code ec;
  fs::rename(path, path + ".partial", ec);
}

std::vector<GameLog> load_logs(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_logs(is);
}

// LLM seats read a JSON profile file and talk to its endpoint over HTTP.
AgentOptions agent_options(const std::string& transcript_path) {
  AgentOptions opts;
  auto sink = std::make_shared<std::ofstream>();
  auto mu = std::make_shared<std::mutex>();
  if (!transcript_path.empty()) {
    sink->open(transcript_path, std::ios::app);
    if (!*sink) throw std::runtime_error("cannot open " + transcript_path);
  }
  opts.llm = [sink, mu](const std::string& profile_path, int) -> std::unique_ptr<Agent> {
    std::ifstream is(profile_path);
    if (!is) throw ConfigError("cannot read llm profile " + profile_path);
    const auto profile = llm::LlmProfile::from_json(json::parse(is));
    llm::TranscriptSink ts;
    if (sink->is_open())
      ts = [sink, mu](const json& e) {
        std::lock_guard lock(*mu);
        *sink << e.dump() << '\n';
      };
    return std::make_unique<llm::LlmAgent>(std::make_shared<llm::HttpChatTransport>(profile), profile, ts);
  };
  return opts;
}

void print_summary(const BatchSummary& s, const std::string& path) {
  const auto j = s.to_json();
  if (!path.empty()) open_out(path) << j.dump(2) << '\n';
  std::cout << j.dump(2) << '\n';
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

void analyze(const std::string& in, const std::string& out_dir) {
  const auto logs = load_logs(in);
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  const auto ts = analytics::trade_space(logs);
  {
    auto os = open_out((dir / "trade_space.csv").string());
    os << "game_id,population,variant,turn,proposer,net_surplus,trade_ratio,accepted\n";
    for (const auto& p : ts.points)
      os << p.game_id << ',' << csv_escape(p.population) << ',' << p.variant << ',' << p.turn << ',' << p.proposer
         << ',' << format_dollars(p.net_surplus) << ',' << p.trade_ratio << ',' << (p.accepted ? 1 : 0) << '\n';
  }

  std::map<std::string, int> regret_counts;
  {
    auto os = open_out((dir / "regret.csv").string());
    os << "game_id,population,turn,player,role,label,action_surplus,counterfactual_gain,reason,evidence\n";
    for (const auto& log : logs)
      for (const auto& r : analytics::classify_actions(log)) {
        std::string ev;
        for (std::size_t i = 0; i < r.evidence.size(); ++i) ev += (i ? " " : "") + std::to_string(r.evidence[i]);
        os << log.header.game_id << ',' << csv_escape(log.header.population()) << ',' << r.turn << ',' << r.player
           << ',' << analytics::to_string(r.role) << ',' << analytics::to_string(r.label) << ','
           << format_dollars(r.action_surplus) << ',' << format_dollars(r.counterfactual_gain) << ','
           << csv_escape(r.reason) << ',' << ev << '\n';
        ++regret_counts[std::string(analytics::to_string(r.label))];
      }
  }

  std::map<std::pair<std::string, int>, std::vector<GameLog>> groups;
  {
    auto os = open_out((dir / "trajectories.csv").string());
    os << "game_id,population,variant,turn,scaled_surplus,degenerate\n";
    for (const auto& log : logs) {
      const auto tr = analytics::surplus_trajectory(log, optimal_allocation(log.header.valuations, log.header.initial));
      for (std::size_t k = 0; k < tr.scaled.size(); ++k)
        os << log.header.game_id << ',' << csv_escape(log.header.population()) << ',' << log.header.variant() << ','
           << k << ',' << tr.scaled[k] << ',' << (tr.degenerate ? 1 : 0) << '\n';
      groups[{log.header.population(), log.header.variant()}].push_back(log);
    }
  }

  json summary{{"games", logs.size()}, {"groups", json::array()}, {"regret_labels", regret_counts}};
  for (const auto& [key, group] : groups) {
    auto g = summarize(group).to_json();
    for (const auto& s : ts.summaries)
      if (s.population == key.first && s.variant == key.second) {
        g["proposals"] = s.proposals;
        g["nonpositive_proposals"] = s.nonpositive_proposals;
        g["rejection_rate"] = s.rejection_rate;
        g["accepted_ratio_mean"] = s.accepted.ratio.mean;
        g["accepted_surplus_mean"] = s.accepted.surplus.mean;
        g["rejected_surplus_mean"] = s.rejected.surplus.mean;
      }
    summary["groups"].push_back(g);
  }
  open_out((dir / "summary.json").string()) << summary.dump(2) << '\n';
  std::cout << summary.dump(2) << '\n';
}

void pareto(const std::string& in, const std::string& format) {
  const auto logs = load_logs(in);
  json out = json::array();
  for (const auto& log : logs) {
    const auto p = optimal_allocation(log.header.valuations, log.header.initial);
    const auto s = scaled_surplus(log.header.valuations, log.final_holdings(), log.header.initial, p);
    if (format == "text") {
      std::cout << log.header.game_id << "  w0=" << format_dollars(p.initial_welfare) << "  w*=" << p.w_star
                << "  observed=" << format_dollars(total_welfare(log.header.valuations, log.final_holdings()))
                << "  scaled=" << s.value << (s.degenerate ? " (degenerate)" : "") << '\n';
      continue;
    }
    json alloc = json::array();
    for (std::size_t i = 0; i < p.allocation.rows(); ++i)
      alloc.push_back(std::vector<double>(p.allocation.row(i).begin(), p.allocation.row(i).end()));
    out.push_back({{"game_id", log.header.game_id},
                   {"status", lp::to_string(p.status)},
                   {"initial_welfare", to_dollars(p.initial_welfare)},
                   {"w_star", p.w_star},
                   {"allocation", alloc},
                   {"scaled_surplus", s.value},
                   {"degenerate", s.degenerate}});
  }
  if (format != "text") std::cout << out.dump(2) << '\n';
}

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v && *v ? v : fallback;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Three-player chip bargaining: simulation, analysis and live play"};
  app.require_subcommand(1);

  int variant = 2;
  std::string seats = "bayesian,bayesian,bayesian";
  int n_games = 200;
  std::uint64_t seed = 0;
  std::string out_path, summary_path, transcript_path, in_path, out_dir, format = "json";

  auto* sim = app.add_subcommand("simulate", "Play a seeded batch of games and write JSONL logs");
  sim->add_option("--variant", variant, "Number of chip colors (2, 3 or 4)")->check(CLI::Range(2, 4));
  sim->add_option("--seats", seats, "Comma-separated seat specs: bayesian, greedy, random, llm:<profile.json>");
  sim->add_option("--n", n_games, "Number of games")->check(CLI::PositiveNumber);
  sim->add_option("--seed", seed, "Master seed; game k uses split_seed(seed, k)");
  sim->add_option("--out", out_path, "Output JSONL log file")->required();
  sim->add_option("--summary", summary_path, "Also write the batch summary JSON here");
  sim->add_option("--transcripts", transcript_path, "Append LLM prompt/response transcripts (JSONL)");

  auto* rep = app.add_subcommand("replicate", "Re-run logged games with another population");
  rep->add_option("--from", in_path, "Source JSONL logs")->required()->check(CLI::ExistingFile);
  rep->add_option("--seats", seats, "Comma-separated seat specs for the new population")->required();
  rep->add_option("--out", out_path, "Output JSONL log file")->required();
  rep->add_option("--summary", summary_path, "Also write the batch summary JSON here");
  rep->add_option("--transcripts", transcript_path, "Append LLM prompt/response transcripts (JSONL)");

  auto* ana = app.add_subcommand("analyze", "Trade space, regret labels and surplus trajectories");
  ana->add_option("--in", in_path, "JSONL logs")->required()->check(CLI::ExistingFile);
  ana->add_option("--out", out_dir, "Output directory")->required();

  auto* par = app.add_subcommand("pareto", "LP welfare optimum for every logged game");
  par->add_option("--in", in_path, "JSONL logs")->required()->check(CLI::ExistingFile);
  par->add_option("--format", format, "json or text")->check(CLI::IsMember({"json", "text"}));

  std::size_t samples = 20000;
  std::string rule = "sampled";
  bool continuous = false;
  auto* cx = app.add_subcommand("complexity", "Monte Carlo count of myopically rational offers");
  auto* cx_variant = cx->add_option("--variant", variant, "Number of chip colors (2, 3 or 4); all three if omitted")
                        ->check(CLI::Range(2, 4));
  cx->add_option("--samples", samples, "Number of valuation draws")->check(CLI::PositiveNumber);
  cx->add_option("--seed", seed, "RNG seed");
  cx->add_option("--rule", rule, "sampled: a drawn opponent accepts; prior: some valuation on the grid accepts")
      ->check(CLI::IsMember({"sampled", "prior"}));
  cx->add_flag("--continuous", continuous, "Draw valuations uniformly instead of on the 5-cent grid");

  std::string host = env_or("BARGAIN_HOST", "127.0.0.1");
  int port = std::stoi(env_or("BARGAIN_PORT", "8080"));
  int ttl_minutes = std::stoi(env_or("BARGAIN_SESSION_TTL_MIN", "60"));
  int delay_ms = std::stoi(env_or("BARGAIN_AGENT_DELAY_MS", "800"));
  std::string agents = env_or("BARGAIN_AGENTS", "bayesian,bayesian");
  std::string log_path;
  auto* srv = app.add_subcommand("serve", "Run the HTTP play service (one human seat per session)");
  srv->add_option("--host", host, "Bind address (env BARGAIN_HOST)");
  srv->add_option("--port", port, "Port (env BARGAIN_PORT)")->check(CLI::Range(1, 65535));
  srv->add_option("--ttl", ttl_minutes, "Idle minutes before a session is abandoned (env BARGAIN_SESSION_TTL_MIN)");
  srv->add_option("--delay-ms", delay_ms, "Pause before each agent proposal (env BARGAIN_AGENT_DELAY_MS)");
  srv->add_option("--agents", agents, "Default agent seats (env BARGAIN_AGENTS)");
  srv->add_option("--log", log_path, "Append finished games to this JSONL file");
  srv->add_option("--transcripts", transcript_path, "Append LLM prompt/response transcripts (JSONL)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*sim) {
      ExperimentSpec spec{variant, split_seats(seats), n_games, seed};
      spec.validate();
      auto os = open_out(out_path);
      try {
        const auto res = run_batch(spec, &os, agent_options(transcript_path));
        print_summary(res.summary, summary_path);
      } catch (...) {
        os.close();
        mark_partial(out_path);
        throw;
      }
    } else if (*rep) {
      const auto source = load_logs(in_path);
      auto os = open_out(out_path);
      try {
        const auto res = replicate(source, split_seats(seats), &os, agent_options(transcript_path));
        print_summary(res.summary, summary_path);
      } catch (...) {
        os.close();
        mark_partial(out_path);
        throw;
      }
    } else if (*ana) {
      analyze(in_path, out_dir);
    } else if (*par) {
      pareto(in_path, format);
    } else if (*cx) {
      const analytics::ComplexityOptions opts{
          rule == "prior" ? analytics::OpponentRule::PriorSupport : analytics::OpponentRule::SampledOpponents,
          continuous};
      auto estimate = [&](int v) {
        const auto est = analytics::expected_rational_trades(GameConfig::variant(v), samples, seed, opts);
        return json{{"variant", v}, {"samples", est.samples}, {"rule", rule}, {"mean", est.mean}, {"se", est.se}};
      };
      if (cx_variant->count() > 0) {
        std::cout << estimate(variant).dump(2) << '\n';
      } else {
        json all = json::array();
        for (int v = 2; v <= 4; ++v) all.push_back(estimate(v));
        std::cout << all.dump(2) << '\n';
      }
    } else if (*srv) {
      service::ServiceConfig cfg;
      cfg.ttl = std::chrono::minutes(ttl_minutes);
      cfg.agent_delay = std::chrono::milliseconds(delay_ms);
      cfg.default_agents = split_seats(agents);
      cfg.log_path = log_path;
      cfg.agents = agent_options(transcript_path);
      service::SessionManager mgr(cfg);
      httplib::Server server;
      service::install_routes(server, mgr);
      std::cerr << "listening on " << host << ':' << port << '\n';
      if (!server.listen(host, port)) throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
