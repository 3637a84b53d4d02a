#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

#include "bargain/game.hpp"

namespace bargain {

/// Enumerates every grid-valued valuation vector one opponent can hold:
/// the numeraire is fixed and each private color takes one of the grid
/// values, giving grid_size^k states for k private colors.
class ValuationSpace {
 public:
  explicit ValuationSpace(const GameConfig& config)
      : n_colors_(config.n_colors()), grid_size_(config.grid_size()) {
    config.validate();
    const auto priv = config.private_colors();
    std::size_t states = 1;
    for (std::size_t i = 0; i < priv.size(); ++i) states *= static_cast<std::size_t>(grid_size_);
    states_ = states;
    table_.resize(states_ * static_cast<std::size_t>(n_colors_));
    for (std::size_t s = 0; s < states_; ++s) {
      std::size_t rest = s;
      Cents* row = table_.data() + s * n_colors_;
      row[config.numeraire] = config.numeraire_value;
      for (int c : priv) {
        row[c] = config.grid_value(static_cast<int>(rest % grid_size_));
        rest /= grid_size_;
      }
    }
  }

  std::size_t size() const { return states_; }
  int n_colors() const { return n_colors_; }

  std::span<const Cents> values(std::size_t state) const {
    return {table_.data() + state * n_colors_, static_cast<std::size_t>(n_colors_)};
  }
  Cents value(std::size_t state, int color) const { return table_[state * n_colors_ + color]; }

  std::optional<std::size_t> index_of(std::span<const Cents> v) const {
    for (std::size_t s = 0; s < states_; ++s)
      if (std::equal(v.begin(), v.end(), values(s).begin())) return s;
    return std::nullopt;
  }

 private:
  int n_colors_;
  int grid_size_;
  std::size_t states_ = 0;
  std::vector<Cents> table_;
};

/// Discrete belief over one opponent's valuation vector. Weights are
/// integers (uniform prior = all ones) so pruning and renormalization are
/// exact; probability(s) = weight(s) / total_weight().
class BeliefState {
 public:
  explicit BeliefState(std::shared_ptr<const ValuationSpace> space)
      : space_(std::move(space)), weights_(space_->size(), 1), total_(space_->size()) {}

  const ValuationSpace& space() const { return *space_; }
  std::size_t size() const { return weights_.size(); }
  std::uint64_t weight(std::size_t s) const { return weights_[s]; }
  std::uint64_t total_weight() const { return total_; }
  double probability(std::size_t s) const { return static_cast<double>(weights_[s]) / static_cast<double>(total_); }

  std::size_t support_size() const {
    std::size_t n = 0;
    for (auto w : weights_) n += w != 0;
    return n;
  }

  bool contains(std::span<const Cents> values) const {
    const auto s = space_->index_of(values);
    return s && weights_[*s] != 0;
  }

  /// Total weight of states whose valuation vector satisfies pred.
  template <typename Pred>
  std::uint64_t weight_where(Pred&& pred) const {
    std::uint64_t w = 0;
    for (std::size_t s = 0; s < weights_.size(); ++s)
      if (weights_[s] && pred(space_->values(s))) w += weights_[s];
    return w;
  }

  /// Zeroes every state failing `keep`. If nothing survives, the belief is
  /// reset to the uniform prior and false is returned.
  template <typename Pred>
  bool restrict_to(Pred&& keep) {
    std::uint64_t kept = 0;
    for (std::size_t s = 0; s < weights_.size(); ++s)
      if (weights_[s] && keep(space_->values(s))) kept += weights_[s];
    if (kept == 0) {
      reset();
      return false;
    }
    for (std::size_t s = 0; s < weights_.size(); ++s)
      if (weights_[s] && !keep(space_->values(s))) weights_[s] = 0;
    total_ = kept;
    return true;
  }

  void reset() {
    std::fill(weights_.begin(), weights_.end(), 1);
    total_ = weights_.size();
  }

  nlohmann::json to_json() const {
    nlohmann::json support = nlohmann::json::array();
    for (std::size_t s = 0; s < weights_.size(); ++s) {
      if (!weights_[s]) continue;
      const auto v = space_->values(s);
      support.push_back({{"values_cents", std::vector<Cents>(v.begin(), v.end())}, {"p", probability(s)}});
    }
    return {{"support_size", support_size()}, {"states", size()}, {"support", support}};
  }

 private:
  std::shared_ptr<const ValuationSpace> space_;
  std::vector<std::uint32_t> weights_;
  std::uint64_t total_;
};

/// Belief weight that `offer`'s responder accepts: zero if the responder
/// cannot pay, else the weight of v with v[give]*give_qty - v[get]*get_qty > 0.
inline std::uint64_t accept_weight(const BeliefState& belief, const Offer& offer,
                                   std::span<const int> responder_holdings) {
  if (!can_pay(responder_holdings, offer)) return 0;
  return belief.weight_where([&](std::span<const Cents> v) { return responder_delta(v, offer) > 0; });
}

inline double accept_prob(const BeliefState& belief, const Offer& offer, std::span<const int> responder_holdings) {
  return static_cast<double>(accept_weight(belief, offer, responder_holdings)) /
         static_cast<double>(belief.total_weight());
}

}  // namespace bargain
