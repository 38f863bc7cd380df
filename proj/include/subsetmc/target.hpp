// Scenario-decomposed targets, cost metering and scenario-level caching.
//
// A target is a sum of N per-scenario log likelihoods plus an optional prior.
// Scenario evaluations are deterministic in (scenario, state); the tasks
// guarantee this through fixed seeding. The evaluator wraps a target with a
// cache whose scope is one top-level step (one full root-node traversal for
// HINTS); entries for the chain's current state survive across steps.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "subsetmc/state.hpp"

namespace subsetmc {

struct ScenarioEval {
  double loglik = 0.0;
  // False when the task satisfied the query from its own whole-run memo
  // (disease grid); such queries consume no budget.
  bool charge = true;
};

struct ScenarioTarget {
  int n_scenarios = 0;
  int dim = 0;
  double sigma0 = 1.0;  // task default proposal scale
  std::function<double(const State&)> log_prior;  // empty when no prior
  std::function<ScenarioEval(int, const State&)> scenario_loglik;
  std::vector<int> permutation;  // current scenario ordering, size N

  bool has_prior() const { return static_cast<bool>(log_prior); }
  double prior_at(const State& theta) const { return log_prior ? log_prior(theta) : 0.0; }
};

ScenarioTarget make_target(int n_scenarios, int dim, double sigma0,
                           std::function<ScenarioEval(int, const State&)> loglik,
                           std::function<double(const State&)> log_prior = nullptr);

// Uniformly re-shuffles the scenario ordering. HINTS subsets are contiguous
// blocks of this permutation, so each non-leaf subset stays the union of its
// children's subsets.
void shuffle_scenarios(ScenarioTarget& target, Rng& rng);

struct EvalCounter {
  std::uint64_t total = 0;      // unique single-scenario evaluations so far
  std::uint64_t step_start = 0;

  void begin_step() { step_start = total; }
  std::uint64_t step_cost() const { return total - step_start; }
};

// Scenario-level cache keyed on the exact bits of the state.
class ScenarioCache {
 public:
  const double* find(int scenario, const State& theta) const;
  void insert(int scenario, const State& theta, double value);
  // Drops everything except entries for `keep`.
  void retain_only(const State& keep);
  void clear() { map_.clear(); }
  std::size_t size() const { return map_.size(); }

 private:
  struct Entry {
    int scenario;
    State theta;
    double value;
  };
  std::unordered_map<std::uint64_t, std::vector<Entry>> map_;
};

// Sink for actual evaluations; proxies subscribe to collect training rows.
class EvalListener {
 public:
  virtual ~EvalListener() = default;
  virtual void on_scenario_eval(int scenario, const State& theta, double loglik) = 0;
};

// Cost-metered, cached access to a target; one per chain.
class Evaluator {
 public:
  explicit Evaluator(const ScenarioTarget& target) : target_(&target) {}

  const ScenarioTarget& target() const { return *target_; }
  EvalCounter& counter() { return counter_; }
  const EvalCounter& counter() const { return counter_; }
  void set_listener(EvalListener* l) { listener_ = l; }

  double scenario(int i, const State& theta);

  // prior_fraction * log_prior + sum of the subset's scenario log likelihoods.
  // Indices must be distinct and in [0, N).
  double subset_log_target(std::span<const int> subset, const State& theta,
                           double prior_fraction);

  double full_log_target(const State& theta);

  // End-of-step cache maintenance: keep only the current state's entries.
  void end_step(const State& current) { cache_.retain_only(current); }

  ScenarioCache& cache() { return cache_; }

 private:
  const ScenarioTarget* target_;
  EvalCounter counter_;
  ScenarioCache cache_;
  EvalListener* listener_ = nullptr;
};

}  // namespace subsetmc
