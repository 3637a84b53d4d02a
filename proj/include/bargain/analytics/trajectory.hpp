#pragma once

#include <string>
#include <vector>

#include "bargain/game_log.hpp"
#include "bargain/pareto.hpp"

namespace bargain::analytics {

struct SurplusTrajectory {
  std::string game_id;
  std::vector<double> scaled;  // turns + 1 points, scaled[0] == 0
  bool degenerate = false;
};

/// Cumulative total surplus after each turn over (w* - w0). For a
/// degenerate optimum every point is 0 except the last, which carries the
/// degenerate scaled_surplus convention.
inline SurplusTrajectory surplus_trajectory(const GameLog& log, const ParetoResult& pareto) {
  const auto& values = log.header.valuations;
  const Cents w0 = total_welfare(values, log.header.initial);
  SurplusTrajectory tr;
  tr.game_id = log.header.game_id;
  tr.scaled.reserve(log.turns.size() + 1);
  tr.scaled.push_back(0.0);
  const auto final_scaled = scaled_surplus(total_welfare(values, log.final_holdings()), w0, pareto);
  tr.degenerate = final_scaled.degenerate;
  for (const auto& t : log.turns)
    tr.scaled.push_back(tr.degenerate ? 0.0 : scaled_surplus(total_welfare(values, t.post_holdings), w0, pareto).value);
  tr.scaled.back() = final_scaled.value;
  if (log.turns.empty() && tr.degenerate) tr.scaled.back() = 0.0;
  return tr;
}

}  // namespace bargain::analytics
