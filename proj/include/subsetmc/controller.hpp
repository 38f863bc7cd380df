// Computation-cost aware epsilon-greedy control of the proposal scale.
//
// Objective: maximise probability-weighted squared jump distance per scenario
// evaluation, subject to a floor on acceptance probability. Statistics are
// kept over a running window that drops the first 25% of history. Untaken
// actions are prioritised; exploratory draws are weighted inversely to the
// action's expected cost; cost that is not attributable to any action (e.g.
// Firefly auxiliary resampling) is averaged and added to every action.
#pragma once

#include <cstdint>
#include <vector>

#include "subsetmc/proposal.hpp"

namespace subsetmc {

struct ControllerConfig {
  ActionSet actions = ActionSet::log_spaced();
  double epsilon = 0.1;
  double alpha0 = 0.02;  // greedy actions need acceptance probability above this
};

class AdaptiveController {
 public:
  explicit AdaptiveController(ControllerConfig cfg);

  // Appends one step of history. `d` is the squared proposed jump distance,
  // `alpha` the acceptance probability, `cost` the step's attributable
  // scenario evaluations and `overhead` the unattributable ones.
  void record_step(double d, int action, double alpha, std::uint64_t cost,
                   std::uint64_t overhead);

  int choose_action(Rng& rng);

  // Greedy action under the acceptance constraint (ties to smallest index).
  // Falls back to the unconstrained argmax when no action satisfies it.
  int greedy_action() const;

  // Locks the controller to the current greedy action (strict mode).
  void freeze();
  bool frozen() const { return frozen_; }

  int n_actions() const { return static_cast<int>(cfg_.actions.multipliers.size()); }
  double multiplier(int k) const { return cfg_.actions.multipliers[static_cast<std::size_t>(k)]; }
  std::size_t history_size() const { return alpha_.size(); }

  // Window statistics, exposed for tests and diagnostics.
  struct Stats {
    std::vector<std::uint64_t> taken;      // N_k
    std::vector<double> weighted_jump;     // D_k
    std::vector<double> cost;              // C_k with overhead share included
    std::vector<double> accept;            // p_k
    double overhead_mean = 0.0;
  };
  Stats window_stats() const;

 private:
  void advance_window(std::size_t tau);

  ControllerConfig cfg_;
  std::vector<double> d_, alpha_;
  std::vector<int> action_;
  std::vector<std::uint64_t> cost_, overhead_;

  std::size_t win_begin_ = 0;  // t1
  std::vector<std::uint64_t> n_k_;
  std::vector<double> dsum_k_, csum_k_, asum_k_;
  double overhead_sum_ = 0.0;

  bool frozen_ = false;
  int frozen_action_ = 0;
};

}  // namespace subsetmc
