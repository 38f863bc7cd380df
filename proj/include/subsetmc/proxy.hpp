// Data-driven per-scenario proxies.
//
// Quadratic: one unregularized least-squares quadratic per scenario, all
// fitted on a shared design matrix so coefficients add exactly across any
// scenario subset. Firefly's lower bound is the same fit shifted down to sit
// below every training value. Nearest-neighbour: a store of evaluated states
// answering queries from the single nearest row inside a distance cut-off,
// falling back to actual evaluation beyond it.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "subsetmc/target.hpp"

namespace subsetmc {

enum class ProxyKind { None, Quadratic, Nearest };

struct ProxyConfig {
  ProxyKind kind = ProxyKind::None;
  double nn_cutoff_multiplier = 5.0;  // cut-off = multiplier * sigma0
  double refit_growth = 1.1;          // geometric, in cumulative evaluation cost
  double drop_fraction = 0.25;        // share of newly added rows dropped from the front
};

inline int quadratic_dof(int dim) { return 1 + dim + dim * (dim + 1) / 2; }

// Quadratic feature expansion [1, theta, upper-triangular theta_a*theta_b].
Eigen::VectorXd quadratic_features(const State& theta);

// Per-scenario quadratic coefficients on the shared feature basis.
class QuadraticProxy {
 public:
  QuadraticProxy() = default;
  QuadraticProxy(Eigen::MatrixXd coef, int dim) : coef_(std::move(coef)), dim_(dim) {}

  bool fitted() const { return coef_.size() > 0; }
  int dim() const { return dim_; }
  int n_scenarios() const { return static_cast<int>(coef_.cols()); }

  // Sum of the subset's per-scenario quadratics at theta. Costs nothing.
  double query(std::span<const int> subset, const State& theta) const;
  double query_scenario(int scenario, const State& theta) const;
  double query_all(const State& theta) const;

  const Eigen::MatrixXd& coefficients() const { return coef_; }

 private:
  Eigen::MatrixXd coef_;  // dof x N
  int dim_ = 0;
};

// Least-squares fit of per-scenario quadratics to rows of (state, values).
// Returns nullopt when the design matrix is rank deficient (fit deferred).
std::optional<QuadraticProxy> fit_quadratic(const std::vector<State>& states,
                                            const Eigen::MatrixXd& values);

// Firefly lower bound: quadratic fit plus a per-scenario shift making the
// surface sit below all fitted log likelihoods. Stored in the log domain, so
// the bound itself is strictly positive.
struct FireflyBound {
  QuadraticProxy quad;
  Eigen::VectorXd shift;  // s_i <= 0

  bool fitted() const { return quad.fitted(); }
  double log_bound(int scenario, const State& theta) const {
    return quad.query_scenario(scenario, theta) + shift[scenario];
  }
};

std::optional<FireflyBound> fit_firefly_bound(const std::vector<State>& states,
                                              const Eigen::MatrixXd& values);

// Geometric refit scheduling in cumulative evaluation cost.
struct RefitSchedule {
  double growth = 1.1;
  double next_refit_cost = 0.0;  // 0 until the first fit arms the schedule
  int trigger_min_states = 0;

  // True when a refit is due given the cumulative cost and available states.
  bool due(std::uint64_t cumulative_cost, int n_states, bool frozen) const {
    if (frozen || n_states < trigger_min_states) return false;
    return static_cast<double>(cumulative_cost) >= next_refit_cost;
  }
  void advance(std::uint64_t cumulative_cost) {
    next_refit_cost = std::max(next_refit_cost, 1.0);
    while (next_refit_cost <= static_cast<double>(cumulative_cost)) next_refit_cost *= growth;
  }
};

// Nearest-neighbour store over evaluated states with a KD-tree index.
class NearestStore {
 public:
  explicit NearestStore(int dim, int n_scenarios) : dim_(dim), n_scenarios_(n_scenarios) {}

  void insert(const State& theta, int scenario, double value);

  struct Hit {
    int row = -1;
    double dist2 = 0.0;
  };
  // Single nearest stored state, regardless of which scenarios it holds.
  std::optional<Hit> nearest(const State& theta) const;

  bool row_has(int row, int scenario) const;
  double row_value(int row, int scenario) const;
  const State& row_state(int row) const { return states_[static_cast<std::size_t>(row)]; }
  std::size_t size() const { return states_.size(); }

 private:
  void rebuild_tree() const;
  int dim_;
  int n_scenarios_;
  std::vector<State> states_;
  std::vector<Eigen::VectorXd> values_;  // NaN where a scenario is missing
  std::unordered_map<std::uint64_t, std::vector<int>> by_state_;

  // KD-tree over states_[0..built_); newer rows are scanned linearly until
  // the next rebuild.
  mutable std::vector<int> tree_nodes_;  // preorder: node index -> row
  mutable std::vector<int> tree_axis_;
  mutable std::size_t built_ = 0;
};

// Chain-local proxy state: training rows, fitted proxies, refit schedule and
// the listener hook that collects rows from actual evaluations.
class ProxyEngine : public EvalListener {
 public:
  ProxyEngine(ProxyConfig cfg, int dim, int n_scenarios, double sigma0, bool firefly_bound);

  ProxyKind kind() const { return cfg_.kind; }
  bool ready() const;

  // EvalListener: every actual evaluation feeds the stores.
  void on_scenario_eval(int scenario, const State& theta, double loglik) override;

  // Quadratic path (also used for the Firefly bound).
  bool quad_ready() const { return quad_.fitted(); }
  const QuadraticProxy& quad() const { return quad_; }
  const FireflyBound& bound() const { return bound_; }
  bool bound_ready() const { return bound_.fitted(); }

  // Nearest path. Queries beyond the cut-off evaluate the actual subset
  // through `ev` (cost accrues there) and the result enters the store.
  double nn_query_subset(std::span<const int> subset, const State& theta, Evaluator& ev);
  double nn_cutoff() const { return nn_cutoff_; }

  // Refit bookkeeping. Call once per step with the chain's cumulative cost.
  void maybe_refit(std::uint64_t cumulative_cost);
  bool refit_due(std::uint64_t cumulative_cost) const {
    return schedule_.due(cumulative_cost, n_rows_, frozen_);
  }

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  // Drops partial row accumulations except those for the current state.
  void end_step(const State& current);

  int n_training_rows() const { return static_cast<int>(row_states_.size()); }
  int refit_count() const { return refit_count_; }

 private:
  void fit_now();

  ProxyConfig cfg_;
  int dim_;
  int n_scenarios_;
  double nn_cutoff_ = 0.0;
  bool want_bound_ = false;
  bool frozen_ = false;

  // Full-sweep training rows (unique states, rejected proposals included).
  std::vector<State> row_states_;
  Eigen::MatrixXd row_values_;  // rows x N, grown geometrically
  int n_rows_ = 0;
  int rows_at_last_refit_ = 0;
  std::unordered_set<std::uint64_t> row_seen_;

  struct Partial {
    State theta;
    Eigen::VectorXd values;
    int count = 0;
  };
  std::unordered_map<std::uint64_t, Partial> partial_;

  RefitSchedule schedule_;
  QuadraticProxy quad_;
  FireflyBound bound_;
  std::unique_ptr<NearestStore> nn_;
  int refit_count_ = 0;
};

}  // namespace subsetmc
