#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bargain/analytics/stats.hpp"
#include "bargain/game_log.hpp"

namespace bargain::analytics {

struct TradePoint {
  std::string game_id;
  std::string population;
  int variant = 0;
  int turn = 0;
  int proposer = 0;
  Cents net_surplus = 0;   // proposer's delta
  double trade_ratio = 0;  // give_qty / get_qty; > 1 concessionary, < 1 extractive
  bool accepted = false;
};

struct TradeGroup {
  Describe surplus;  // dollars
  Describe ratio;
};

struct TradeSpaceSummary {
  std::string population;
  int variant = 0;
  std::size_t proposals = 0;
  std::size_t nonpositive_proposals = 0;
  double rejection_rate = 0.0;
  TradeGroup accepted;
  TradeGroup rejected;
};

struct TradeSpace {
  std::vector<TradePoint> points;
  std::vector<TradeSpaceSummary> summaries;  // sorted by (population, variant)
};

inline std::vector<TradePoint> trade_points(const GameLog& log) {
  std::vector<TradePoint> out;
  const auto& h = log.header;
  for (const auto& t : log.turns) {
    if (t.offer.is_pass()) continue;
    out.push_back({h.game_id, h.population(), h.variant(), t.turn, t.proposer,
                   proposer_delta(h.valuations, t.proposer, t.offer),
                   static_cast<double>(t.offer.give_qty) / static_cast<double>(t.offer.get_qty), t.executed});
  }
  return out;
}

/// Trade-space statistics per (population, variant). An empty log set
/// yields an empty result.
inline TradeSpace trade_space(std::span<const GameLog> logs) {
  TradeSpace ts;
  for (const auto& log : logs) {
    auto pts = trade_points(log);
    ts.points.insert(ts.points.end(), pts.begin(), pts.end());
  }
  std::map<std::pair<std::string, int>, std::vector<const TradePoint*>> groups;
  for (const auto& p : ts.points) groups[{p.population, p.variant}].push_back(&p);
  for (const auto& [key, pts] : groups) {
    TradeSpaceSummary s;
    s.population = key.first;
    s.variant = key.second;
    s.proposals = pts.size();
    std::vector<double> acc_s, acc_r, rej_s, rej_r;
    for (const auto* p : pts) {
      if (p->net_surplus <= 0) ++s.nonpositive_proposals;
      (p->accepted ? acc_s : rej_s).push_back(to_dollars(p->net_surplus));
      (p->accepted ? acc_r : rej_r).push_back(p->trade_ratio);
    }
    s.rejection_rate = s.proposals ? static_cast<double>(rej_s.size()) / static_cast<double>(s.proposals) : 0.0;
    s.accepted = {describe(acc_s), describe(acc_r)};
    s.rejected = {describe(rej_s), describe(rej_r)};
    ts.summaries.push_back(std::move(s));
  }
  return ts;
}

}  // namespace bargain::analytics
