#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string_view>
#include <vector>

namespace bargain::lp {

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

inline std::string_view to_string(Status s) {
  switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::IterationLimit: return "iteration_limit";
  }
  return "unknown";
}

struct Result {
  Status status = Status::IterationLimit;
  std::vector<double> x;
  double objective = 0.0;
  int iterations = 0;
};

/// Dense two-phase tableau simplex for
///   maximize c.x  subject to  A x = b,  x >= 0.
/// Rows with negative b are negated first. Bland's rule throughout, so it
/// cannot cycle. Meant for the handful-of-variables problems this library
/// poses, not for scale.
class Simplex {
 public:
  Simplex(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double> c, double eps = 1e-9)
      : m_(b.size()), n_(c.size()), eps_(eps), c_(std::move(c)) {
    // Tableau columns: n structural, m artificial, then rhs.
    width_ = n_ + m_ + 1;
    t_.assign((m_ + 1) * width_, 0.0);
    basis_.resize(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      const double sign = b[i] < 0 ? -1.0 : 1.0;
      for (std::size_t j = 0; j < n_; ++j) at(i, j) = sign * a[i][j];
      at(i, n_ + i) = 1.0;
      at(i, width_ - 1) = sign * b[i];
      basis_[i] = n_ + i;
    }
  }

  Result solve(int max_iterations = 10000) {
    Result res;
    // Phase 1: minimize the artificial sum == maximize -sum.
    set_objective([&](std::size_t j) { return j >= n_ && j < n_ + m_ ? -1.0 : 0.0; });
    auto st = iterate(n_ + m_, max_iterations, res.iterations);
    if (st != Status::Optimal) {
      res.status = st;
      return res;
    }
    if (-rhs(m_) > 1e-7 * (1.0 + scale_)) {
      res.status = Status::Infeasible;
      return res;
    }
    drive_out_artificials();

    // Phase 2 over structural columns only.
    set_objective([&](std::size_t j) { return j < n_ ? c_[j] : 0.0; });
    st = iterate(n_, max_iterations, res.iterations);
    res.status = st;
    if (st != Status::Optimal) return res;

    res.x.assign(n_, 0.0);
    for (std::size_t i = 0; i < m_; ++i)
      if (basis_[i] < n_) res.x[basis_[i]] = std::max(0.0, rhs(i));
    res.objective = 0.0;
    for (std::size_t j = 0; j < n_; ++j) res.objective += c_[j] * res.x[j];
    return res;
  }

 private:
  double& at(std::size_t r, std::size_t c) { return t_[r * width_ + c]; }
  double rhs(std::size_t r) { return at(r, width_ - 1); }

  // Objective row holds reduced costs d_j = c_B B^-1 A_j - c_j; optimal
  // when every eligible d_j >= 0.
  template <typename Cost>
  void set_objective(Cost cost) {
    for (std::size_t j = 0; j < width_; ++j) at(m_, j) = j + 1 < width_ ? -cost(j) : 0.0;
    scale_ = 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = cost(basis_[i]);
      scale_ = std::max(scale_, std::abs(rhs(i)));
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) at(m_, j) += cb * at(i, j);
    }
  }

  Status iterate(std::size_t eligible_cols, int max_iterations, int& iterations) {
    for (;;) {
      if (iterations >= max_iterations) return Status::IterationLimit;
      std::size_t enter = width_;
      for (std::size_t j = 0; j < eligible_cols; ++j)
        if (at(m_, j) < -eps_) {
          enter = j;
          break;
        }
      if (enter == width_) return Status::Optimal;

      std::size_t leave = m_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = at(i, enter);
        if (a <= eps_) continue;
        const double ratio = rhs(i) / a;
        if (ratio < best - eps_ || (std::abs(ratio - best) <= eps_ && leave < m_ && basis_[i] < basis_[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave == m_) return Status::Unbounded;
      pivot(leave, enter);
      ++iterations;
    }
  }

  void pivot(std::size_t r, std::size_t c) {
    const double p = at(r, c);
    for (std::size_t j = 0; j < width_; ++j) at(r, j) /= p;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double f = at(i, c);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) at(i, j) -= f * at(r, j);
    }
    basis_[r] = c;
  }

  // After phase 1, pivot any artificial still basic (at zero level) onto a
  // structural column; rows with no such column are redundant.
  void drive_out_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      for (std::size_t j = 0; j < n_; ++j)
        if (std::abs(at(i, j)) > eps_) {
          pivot(i, j);
          break;
        }
    }
  }

  std::size_t m_, n_, width_ = 0;
  double eps_;
  double scale_ = 0.0;
  std::vector<double> c_;
  std::vector<double> t_;
  std::vector<std::size_t> basis_;
};

inline Result maximize(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double> c) {
  return Simplex(std::move(a), std::move(b), std::move(c)).solve();
}

}  // namespace bargain::lp
