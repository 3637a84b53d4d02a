#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bargain/game.hpp"
#include "bargain/simplex.hpp"

namespace bargain {

struct ParetoResult {
  Matrix<double> allocation;       // A*, continuous
  double w_star = 0.0;             // dollars, rounded to 1e-6
  double w_star_cents = 0.0;       // unrounded solver objective in cents
  std::vector<Cents> floors;       // per-player initial welfare
  Cents initial_welfare = 0;
  lp::Status status = lp::Status::IterationLimit;

  bool optimal() const { return status == lp::Status::Optimal; }
};

inline double round_micro_dollars(double cents) { return std::round(cents * 1e4) / 1e6; }

/// Maximum total welfare over continuous reallocations that conserve every
/// color, keep entries non-negative, and leave no player below their
/// initial welfare.
inline ParetoResult optimal_allocation(const Valuations& values, const Holdings& initial) {
  const std::size_t n = initial.rows();
  const std::size_t m = initial.cols();
  if (values.rows() != n || values.cols() != m) throw std::invalid_argument("valuation/allocation shape mismatch");

  ParetoResult res;
  res.floors.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    res.floors[i] = welfare(values, initial, static_cast<int>(i));
    res.initial_welfare += res.floors[i];
  }

  // Variables: a_ig (row-major), then one surplus slack per player.
  const std::size_t nv = n * m + n;
  std::vector<std::vector<double>> a;
  std::vector<double> b;
  for (std::size_t g = 0; g < m; ++g) {
    std::vector<double> row(nv, 0.0);
    for (std::size_t i = 0; i < n; ++i) row[i * m + g] = 1.0;
    a.push_back(std::move(row));
    b.push_back(static_cast<double>(initial.column_sum(g)));
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> row(nv, 0.0);
    for (std::size_t g = 0; g < m; ++g) row[i * m + g] = static_cast<double>(values(i, g));
    row[n * m + i] = -1.0;
    a.push_back(std::move(row));
    b.push_back(static_cast<double>(res.floors[i]));
  }
  std::vector<double> c(nv, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t g = 0; g < m; ++g) c[i * m + g] = static_cast<double>(values(i, g));

  const auto sol = lp::maximize(std::move(a), std::move(b), std::move(c));
  res.status = sol.status;
  res.allocation = Matrix<double>(n, m, 0.0);
  if (!sol.x.empty())
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t g = 0; g < m; ++g) res.allocation(i, g) = sol.x[i * m + g];
  res.w_star_cents = sol.objective;
  res.w_star = round_micro_dollars(sol.objective);
  return res;
}

class OracleTooLarge : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Exhaustive search over integer allocations satisfying the same
/// constraints; returns the best total welfare in cents. Refuses when any
/// color has more than `max_chips` chips in total or the search space
/// exceeds `max_points`.
inline Cents integer_oracle(const Valuations& values, const Holdings& initial, int max_chips = 12,
                            std::uint64_t max_points = 50'000'000) {
  const int n = static_cast<int>(initial.rows());
  const int m = static_cast<int>(initial.cols());
  std::vector<int> totals(m);
  double points = 1.0;
  for (int g = 0; g < m; ++g) {
    totals[g] = initial.column_sum(g);
    if (totals[g] > max_chips)
      throw OracleTooLarge("color " + std::to_string(g) + " has " + std::to_string(totals[g]) + " chips");
    // compositions of T into n parts: C(T + n - 1, n - 1)
    double comb = 1.0;
    for (int k = 1; k < n; ++k) comb = comb * (totals[g] + k) / k;
    points *= comb;
  }
  if (points > static_cast<double>(max_points)) throw OracleTooLarge("search space too large");

  std::vector<Cents> floors(n), w(n, 0);
  for (int i = 0; i < n; ++i) floors[i] = welfare(values, initial, i);

  // Best additional welfare any player could still collect from colors >= g.
  std::vector<std::vector<Cents>> remaining_cap(m + 1, std::vector<Cents>(n, 0));
  for (int g = m - 1; g >= 0; --g)
    for (int i = 0; i < n; ++i) remaining_cap[g][i] = remaining_cap[g + 1][i] + values(i, g) * totals[g];

  Cents best = std::numeric_limits<Cents>::min();
  // Depth-first over (color, player) cells.
  auto rec = [&](auto&& self, int g, int i, int left) -> void {
    if (g == m) {
      for (int p = 0; p < n; ++p)
        if (w[p] < floors[p]) return;
      Cents total = 0;
      for (int p = 0; p < n; ++p) total += w[p];
      best = std::max(best, total);
      return;
    }
    if (i == 0) {
      for (int p = 0; p < n; ++p)
        if (w[p] + remaining_cap[g][p] < floors[p]) return;
    }
    if (i == n - 1) {
      w[i] += values(i, g) * left;
      self(self, g + 1, 0, g + 1 < m ? totals[g + 1] : 0);
      w[i] -= values(i, g) * left;
      return;
    }
    for (int q = 0; q <= left; ++q) {
      w[i] += values(i, g) * q;
      self(self, g, i + 1, left - q);
      w[i] -= values(i, g) * q;
    }
  };
  rec(rec, 0, 0, m > 0 ? totals[0] : 0);
  return best;
}

struct ScaledSurplus {
  double value = 0.0;
  bool degenerate = false;  // optimum within a cent of the initial welfare
};

/// (w(observed) - w0) / (w* - w0). Negative values are legal.
inline ScaledSurplus scaled_surplus(Cents observed_total, Cents initial_total, const ParetoResult& pareto) {
  const double denom = pareto.w_star_cents - static_cast<double>(initial_total);
  if (denom < 1.0) return {observed_total >= initial_total ? 1.0 : 0.0, true};
  return {static_cast<double>(observed_total - initial_total) / denom, false};
}

inline ScaledSurplus scaled_surplus(const Valuations& values, const Holdings& observed, const Holdings& initial,
                                    const ParetoResult& pareto) {
  return scaled_surplus(total_welfare(values, observed), total_welfare(values, initial), pareto);
}

}  // namespace bargain
