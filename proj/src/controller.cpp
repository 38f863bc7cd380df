#include "subsetmc/controller.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace subsetmc {

AdaptiveController::AdaptiveController(ControllerConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.actions.multipliers.empty()) throw std::invalid_argument("empty action set");
  for (std::size_t i = 1; i < cfg_.actions.multipliers.size(); ++i) {
    if (cfg_.actions.multipliers[i] <= cfg_.actions.multipliers[i - 1]) {
      throw std::invalid_argument("action multipliers must be strictly increasing");
    }
  }
  if (cfg_.actions.multipliers.front() <= 0.0) {
    throw std::invalid_argument("action multipliers must be positive");
  }
  auto k = cfg_.actions.multipliers.size();
  n_k_.assign(k, 0);
  dsum_k_.assign(k, 0.0);
  csum_k_.assign(k, 0.0);
  asum_k_.assign(k, 0.0);
}

void AdaptiveController::record_step(double d, int action, double alpha,
                                     std::uint64_t cost, std::uint64_t overhead) {
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha outside [0,1]");
  d_.push_back(d);
  action_.push_back(action);
  alpha_.push_back(alpha);
  cost_.push_back(cost);
  overhead_.push_back(overhead);
  auto kk = static_cast<std::size_t>(action);
  n_k_[kk] += 1;
  dsum_k_[kk] += alpha * d;
  csum_k_[kk] += static_cast<double>(cost);
  asum_k_[kk] += alpha;
  overhead_sum_ += static_cast<double>(overhead);
}

void AdaptiveController::advance_window(std::size_t tau) {
  // Analysis window is [floor(tau/4), tau): the first 25% of the running
  // history is always excluded.
  std::size_t t1 = tau / 4;
  while (win_begin_ < t1) {
    auto kk = static_cast<std::size_t>(action_[win_begin_]);
    n_k_[kk] -= 1;
    dsum_k_[kk] -= alpha_[win_begin_] * d_[win_begin_];
    csum_k_[kk] -= static_cast<double>(cost_[win_begin_]);
    asum_k_[kk] -= alpha_[win_begin_];
    overhead_sum_ -= static_cast<double>(overhead_[win_begin_]);
    ++win_begin_;
  }
}

AdaptiveController::Stats AdaptiveController::window_stats() const {
  Stats s;
  auto k = cfg_.actions.multipliers.size();
  s.taken = n_k_;
  s.weighted_jump = dsum_k_;
  s.accept.assign(k, 0.0);
  s.cost.assign(k, 0.0);
  std::size_t window_len = alpha_.size() - win_begin_;
  s.overhead_mean = window_len > 0 ? overhead_sum_ / static_cast<double>(window_len) : 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    s.accept[i] = n_k_[i] > 0 ? asum_k_[i] / static_cast<double>(n_k_[i]) : 0.0;
    s.cost[i] = csum_k_[i] + static_cast<double>(n_k_[i]) * s.overhead_mean;
  }
  return s;
}

int AdaptiveController::greedy_action() const {
  Stats s = window_stats();
  const int k = n_actions();
  int best = -1;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i) {
    if (s.taken[static_cast<std::size_t>(i)] == 0) continue;
    if (s.accept[static_cast<std::size_t>(i)] <= cfg_.alpha0) continue;
    double c = s.cost[static_cast<std::size_t>(i)];
    double score = c > 0.0 ? s.weighted_jump[static_cast<std::size_t>(i)] / c
                           : std::numeric_limits<double>::infinity();
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  if (best >= 0) return best;
  // No action satisfies the acceptance constraint: fall back to the
  // unconstrained argmax among taken actions.
  for (int i = 0; i < k; ++i) {
    if (s.taken[static_cast<std::size_t>(i)] == 0) continue;
    double c = s.cost[static_cast<std::size_t>(i)];
    double score = c > 0.0 ? s.weighted_jump[static_cast<std::size_t>(i)] / c
                           : std::numeric_limits<double>::infinity();
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  return best >= 0 ? best : 0;
}

int AdaptiveController::choose_action(Rng& rng) {
  if (frozen_) return frozen_action_;
  advance_window(alpha_.size());
  Stats s = window_stats();
  const int k = n_actions();

  std::vector<int> untaken;
  for (int i = 0; i < k; ++i) {
    if (s.taken[static_cast<std::size_t>(i)] == 0) untaken.push_back(i);
  }
  if (!untaken.empty()) {
    return untaken[rng.uniform_int(untaken.size())];
  }

  auto exploratory = [&]() {
    // P(k) proportional to (N_k + 1) / C_k; free actions are maximally cheap.
    std::vector<double> w(static_cast<std::size_t>(k));
    double total = 0.0;
    for (int i = 0; i < k; ++i) {
      double c = std::max(s.cost[static_cast<std::size_t>(i)], 1.0);
      w[static_cast<std::size_t>(i)] =
          static_cast<double>(s.taken[static_cast<std::size_t>(i)] + 1) / c;
      total += w[static_cast<std::size_t>(i)];
    }
    double u = rng.uniform01() * total;
    for (int i = 0; i < k; ++i) {
      u -= w[static_cast<std::size_t>(i)];
      if (u <= 0.0) return i;
    }
    return k - 1;
  };

  if (rng.uniform01() < cfg_.epsilon) return exploratory();

  int best = -1;
  double best_score = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i) {
    if (s.accept[static_cast<std::size_t>(i)] <= cfg_.alpha0) continue;
    double c = s.cost[static_cast<std::size_t>(i)];
    double score = c > 0.0 ? s.weighted_jump[static_cast<std::size_t>(i)] / c
                           : std::numeric_limits<double>::infinity();
    if (score > best_score) {
      best_score = score;
      best = i;
    }
  }
  if (best < 0) return exploratory();  // empty feasible set
  return best;
}

void AdaptiveController::freeze() {
  advance_window(alpha_.size());
  frozen_action_ = greedy_action();
  frozen_ = true;
}

}  // namespace subsetmc
