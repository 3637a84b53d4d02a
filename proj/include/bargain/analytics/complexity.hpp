#pragma once

#include <cstdint>
#include <vector>

#include "bargain/analytics/stats.hpp"
#include "bargain/game.hpp"
#include "bargain/rng.hpp"

namespace bargain::analytics {

enum class OpponentRule {
  // Some opponent, at the valuations drawn for this sample, gains by accepting.
  SampledOpponents,
  // Some valuation in the prior's support would accept (support test only).
  PriorSupport,
};

struct ComplexityOptions {
  OpponentRule rule = OpponentRule::SampledOpponents;
  bool continuous = false;  // uniform on [low, high] instead of the value grid
};

struct Estimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t samples = 0;
};

/// Number of myopically rational offers open to one proposer at the
/// starting configuration: ordered color pairs, 1 <= x, y <= endowment,
/// proposer strictly gains, and the opponent rule holds.
inline int count_rational_offers(const GameConfig& config, const std::vector<std::vector<double>>& values,
                                 int proposer, OpponentRule rule) {
  const int m = config.n_colors();
  const int e = config.endowment_per_color;
  const double num = static_cast<double>(config.numeraire_value);
  int count = 0;
  for (int g = 0; g < m; ++g)
    for (int r = 0; r < m; ++r) {
      if (g == r) continue;
      const double give_hi = g == config.numeraire ? num : static_cast<double>(config.private_value_high);
      const double get_lo = r == config.numeraire ? num : static_cast<double>(config.private_value_low);
      for (int x = 1; x <= e; ++x)
        for (int y = 1; y <= e; ++y) {
          if (values[proposer][r] * y - values[proposer][g] * x <= 0) continue;
          bool someone = false;
          if (rule == OpponentRule::PriorSupport) {
            someone = give_hi * x - get_lo * y > 0;
          } else {
            for (int j = 0; j < config.n_players && !someone; ++j)
              someone = j != proposer && values[j][g] * x - values[j][r] * y > 0;
          }
          count += someone;
        }
    }
  return count;
}

/// Monte Carlo estimate of the expected number of myopically rational
/// offers per proposer at the start of a game. Each sample draws a full
/// valuation profile and averages the count over all proposers.
inline Estimate expected_rational_trades(const GameConfig& config, std::size_t n_samples, std::uint64_t seed,
                                         ComplexityOptions opts = {}) {
  config.validate();
  if (n_samples == 0) throw ConfigError("n_samples must be >= 1");
  Rng rng(seed);
  const int n = config.n_players;
  const int m = config.n_colors();
  std::vector<std::vector<double>> values(n, std::vector<double>(m));
  std::vector<double> per_sample;
  per_sample.reserve(n_samples);
  for (std::size_t s = 0; s < n_samples; ++s) {
    for (int p = 0; p < n; ++p)
      for (int c = 0; c < m; ++c) {
        if (c == config.numeraire) {
          values[p][c] = static_cast<double>(config.numeraire_value);
        } else if (opts.continuous) {
          const auto lo = static_cast<double>(config.private_value_low);
          const auto hi = static_cast<double>(config.private_value_high);
          values[p][c] = lo + (hi - lo) * rng.unit();
        } else {
          values[p][c] = static_cast<double>(config.grid_value(static_cast<int>(rng.below(config.grid_size()))));
        }
      }
    double total = 0.0;
    for (int p = 0; p < n; ++p) total += count_rational_offers(config, values, p, opts.rule);
    per_sample.push_back(total / n);
  }
  const auto d = describe(per_sample);
  return {d.mean, d.se, d.n};
}

}  // namespace bargain::analytics
