#include "subsetmc/target.hpp"

#include <numeric>

#include "subsetmc/special.hpp"

namespace subsetmc {

ScenarioTarget make_target(int n_scenarios, int dim, double sigma0,
                           std::function<ScenarioEval(int, const State&)> loglik,
                           std::function<double(const State&)> log_prior) {
  ScenarioTarget t;
  t.n_scenarios = n_scenarios;
  t.dim = dim;
  t.sigma0 = sigma0;
  t.scenario_loglik = std::move(loglik);
  t.log_prior = std::move(log_prior);
  t.permutation.resize(n_scenarios);
  std::iota(t.permutation.begin(), t.permutation.end(), 0);
  return t;
}

void shuffle_scenarios(ScenarioTarget& target, Rng& rng) {
  rng.shuffle(target.permutation);
}

const double* ScenarioCache::find(int scenario, const State& theta) const {
  auto it = map_.find(exact_state_hash(theta));
  if (it == map_.end()) return nullptr;
  for (const auto& e : it->second) {
    if (e.scenario == scenario && e.theta == theta) return &e.value;
  }
  return nullptr;
}

void ScenarioCache::insert(int scenario, const State& theta, double value) {
  map_[exact_state_hash(theta)].push_back(Entry{scenario, theta, value});
}

void ScenarioCache::retain_only(const State& keep) {
  auto kept = map_.find(exact_state_hash(keep));
  if (kept == map_.end()) {
    map_.clear();
    return;
  }
  auto entries = std::move(kept->second);
  std::erase_if(entries, [&](const Entry& e) { return e.theta != keep; });
  map_.clear();
  if (!entries.empty()) map_[exact_state_hash(keep)] = std::move(entries);
}

double Evaluator::scenario(int i, const State& theta) {
  if (const double* hit = cache_.find(i, theta)) return *hit;
  ScenarioEval ev = target_->scenario_loglik(i, theta);
  if (ev.charge) ++counter_.total;
  cache_.insert(i, theta, ev.loglik);
  if (listener_) listener_->on_scenario_eval(i, theta, ev.loglik);
  return ev.loglik;
}

double Evaluator::subset_log_target(std::span<const int> subset, const State& theta,
                                    double prior_fraction) {
  std::vector<bool> seen(static_cast<std::size_t>(target_->n_scenarios), false);
  double sum = 0.0;
  for (int i : subset) {
    if (i < 0 || i >= target_->n_scenarios) throw std::invalid_argument("scenario index out of range");
    if (seen[static_cast<std::size_t>(i)]) throw std::invalid_argument("duplicate scenario index in subset");
    seen[static_cast<std::size_t>(i)] = true;
    sum += scenario(i, theta);
  }
  if (prior_fraction != 0.0 && target_->has_prior()) {
    sum += prior_fraction * target_->prior_at(theta);
  }
  return sum;
}

double Evaluator::full_log_target(const State& theta) {
  double sum = target_->has_prior() ? target_->prior_at(theta) : 0.0;
  for (int i = 0; i < target_->n_scenarios; ++i) sum += scenario(i, theta);
  return sum;
}

}  // namespace subsetmc
