#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace bargain::analytics {

struct Describe {
  std::size_t n = 0;
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1)
  double se = 0.0;  // sd / sqrt(n)
  double median = 0.0;
};

inline Describe describe(std::span<const double> xs) {
  Describe d;
  d.n = xs.size();
  if (d.n == 0) return d;
  double sum = 0.0;
  for (double x : xs) sum += x;
  d.mean = sum / static_cast<double>(d.n);
  if (d.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - d.mean) * (x - d.mean);
    d.sd = std::sqrt(ss / static_cast<double>(d.n - 1));
    d.se = d.sd / std::sqrt(static_cast<double>(d.n));
  }
  std::vector<double> sorted(xs.begin(), xs.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = d.n / 2;
  d.median = d.n % 2 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
  return d;
}

}  // namespace bargain::analytics
