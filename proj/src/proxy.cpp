#include "subsetmc/proxy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace subsetmc {

Eigen::VectorXd quadratic_features(const State& theta) {
  const int d = static_cast<int>(theta.size());
  Eigen::VectorXd f(quadratic_dof(d));
  int idx = 0;
  f[idx++] = 1.0;
  for (int i = 0; i < d; ++i) f[idx++] = theta[i];
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) f[idx++] = theta[i] * theta[j];
  }
  return f;
}

double QuadraticProxy::query(std::span<const int> subset, const State& theta) const {
  if (subset.empty()) return 0.0;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(coef_.rows());
  for (int i : subset) c += coef_.col(i);
  return quadratic_features(theta).dot(c);
}

double QuadraticProxy::query_scenario(int scenario, const State& theta) const {
  return quadratic_features(theta).dot(coef_.col(scenario));
}

double QuadraticProxy::query_all(const State& theta) const {
  return quadratic_features(theta).dot(coef_.rowwise().sum());
}

std::optional<QuadraticProxy> fit_quadratic(const std::vector<State>& states,
                                            const Eigen::MatrixXd& values) {
  if (states.empty()) return std::nullopt;
  const int d = static_cast<int>(states[0].size());
  const int dof = quadratic_dof(d);
  const int rows = static_cast<int>(states.size());
  if (rows < dof) return std::nullopt;

  Eigen::MatrixXd design(rows, dof);
  for (int r = 0; r < rows; ++r) design.row(r) = quadratic_features(states[static_cast<std::size_t>(r)]);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < dof) return std::nullopt;
  Eigen::MatrixXd coef = qr.solve(values);
  return QuadraticProxy(std::move(coef), d);
}

std::optional<FireflyBound> fit_firefly_bound(const std::vector<State>& states,
                                              const Eigen::MatrixXd& values) {
  auto quad = fit_quadratic(states, values);
  if (!quad) return std::nullopt;
  const int rows = static_cast<int>(states.size());
  const int n = quad->n_scenarios();
  Eigen::MatrixXd fitted(rows, n);
  for (int r = 0; r < rows; ++r) {
    Eigen::VectorXd f = quadratic_features(states[static_cast<std::size_t>(r)]);
    fitted.row(r) = (f.transpose() * quad->coefficients());
  }
  // Shift each scenario's surface down to the most negative residual so the
  // bound sits below every training value.
  Eigen::VectorXd shift = (values - fitted).colwise().minCoeff().transpose();
  shift = shift.cwiseMin(0.0);
  FireflyBound b;
  b.quad = std::move(*quad);
  b.shift = std::move(shift);
  return b;
}

void NearestStore::insert(const State& theta, int scenario, double value) {
  auto h = exact_state_hash(theta);
  auto& rows = by_state_[h];
  for (int r : rows) {
    if (states_[static_cast<std::size_t>(r)] == theta) {
      values_[static_cast<std::size_t>(r)][scenario] = value;
      return;
    }
  }
  states_.push_back(theta);
  values_.emplace_back(Eigen::VectorXd::Constant(n_scenarios_, std::numeric_limits<double>::quiet_NaN()));
  values_.back()[scenario] = value;
  rows.push_back(static_cast<int>(states_.size()) - 1);
}

bool NearestStore::row_has(int row, int scenario) const {
  return !std::isnan(values_[static_cast<std::size_t>(row)][scenario]);
}

double NearestStore::row_value(int row, int scenario) const {
  return values_[static_cast<std::size_t>(row)][scenario];
}

namespace {

struct KdBuildCtx {
  const std::vector<State>* states;
  std::vector<int>* nodes;
  std::vector<int>* axis;
  int dim;
};

void kd_build(KdBuildCtx& ctx, std::vector<int>& rows, int lo, int hi, int depth, int node) {
  if (lo >= hi) return;
  int ax = depth % ctx.dim;
  int mid = (lo + hi) / 2;
  std::nth_element(rows.begin() + lo, rows.begin() + mid, rows.begin() + hi,
                   [&](int a, int b) {
                     return (*ctx.states)[static_cast<std::size_t>(a)][ax] <
                            (*ctx.states)[static_cast<std::size_t>(b)][ax];
                   });
  (*ctx.nodes)[static_cast<std::size_t>(node)] = rows[static_cast<std::size_t>(mid)];
  (*ctx.axis)[static_cast<std::size_t>(node)] = ax;
  kd_build(ctx, rows, lo, mid, depth + 1, 2 * node + 1);
  kd_build(ctx, rows, mid + 1, hi, depth + 1, 2 * node + 2);
}

void kd_search(const std::vector<int>& nodes, const std::vector<int>& axis,
               const std::vector<State>& states, const State& q, int node,
               int& best_row, double& best_d2) {
  if (node >= static_cast<int>(nodes.size()) || nodes[static_cast<std::size_t>(node)] < 0) return;
  int row = nodes[static_cast<std::size_t>(node)];
  double d2 = (states[static_cast<std::size_t>(row)] - q).squaredNorm();
  if (d2 < best_d2) {
    best_d2 = d2;
    best_row = row;
  }
  int ax = axis[static_cast<std::size_t>(node)];
  double delta = q[ax] - states[static_cast<std::size_t>(row)][ax];
  int near = delta < 0 ? 2 * node + 1 : 2 * node + 2;
  int far = delta < 0 ? 2 * node + 2 : 2 * node + 1;
  kd_search(nodes, axis, states, q, near, best_row, best_d2);
  if (delta * delta < best_d2) kd_search(nodes, axis, states, q, far, best_row, best_d2);
}

}  // namespace

void NearestStore::rebuild_tree() const {
  std::size_t n = states_.size();
  std::size_t cap = 1;
  while (cap < 2 * n + 2) cap <<= 1;
  tree_nodes_.assign(cap, -1);
  tree_axis_.assign(cap, 0);
  std::vector<int> rows(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = static_cast<int>(i);
  KdBuildCtx ctx{&states_, &tree_nodes_, &tree_axis_, dim_};
  kd_build(ctx, rows, 0, static_cast<int>(n), 0, 0);
  built_ = n;
}

std::optional<NearestStore::Hit> NearestStore::nearest(const State& theta) const {
  if (states_.empty()) return std::nullopt;
  if (states_.size() >= 64 && states_.size() > 2 * built_) rebuild_tree();
  int best_row = -1;
  double best_d2 = std::numeric_limits<double>::infinity();
  if (built_ > 0) kd_search(tree_nodes_, tree_axis_, states_, theta, 0, best_row, best_d2);
  for (std::size_t r = built_; r < states_.size(); ++r) {
    double d2 = (states_[r] - theta).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best_row = static_cast<int>(r);
    }
  }
  return Hit{best_row, best_d2};
}

ProxyEngine::ProxyEngine(ProxyConfig cfg, int dim, int n_scenarios, double sigma0,
                         bool firefly_bound)
    : cfg_(cfg), dim_(dim), n_scenarios_(n_scenarios), want_bound_(firefly_bound) {
  nn_cutoff_ = cfg_.nn_cutoff_multiplier * sigma0;
  schedule_.growth = cfg_.refit_growth;
  schedule_.trigger_min_states = (cfg_.kind == ProxyKind::Quadratic || firefly_bound)
                                     ? quadratic_dof(dim)
                                     : 0;
  if (cfg_.kind == ProxyKind::Nearest) {
    nn_ = std::make_unique<NearestStore>(dim, n_scenarios);
  }
  row_values_.resize(0, n_scenarios);
}

bool ProxyEngine::ready() const {
  switch (cfg_.kind) {
    case ProxyKind::None:
      return false;
    case ProxyKind::Quadratic:
      return quad_.fitted();
    case ProxyKind::Nearest:
      return nn_ && nn_->size() > 0;
  }
  return false;
}

void ProxyEngine::on_scenario_eval(int scenario, const State& theta, double loglik) {
  if (nn_ && !frozen_) nn_->insert(theta, scenario, loglik);
  if (cfg_.kind != ProxyKind::Quadratic && !want_bound_) return;

  auto h = exact_state_hash(theta);
  if (row_seen_.contains(h)) return;
  auto& p = partial_[h];
  if (p.count == 0) {
    p.theta = theta;
    p.values = Eigen::VectorXd::Constant(n_scenarios_, std::numeric_limits<double>::quiet_NaN());
  }
  if (!std::isnan(p.values[scenario])) return;  // same scenario twice (cache cleared)
  p.values[scenario] = loglik;
  if (++p.count < n_scenarios_) return;

  // Full sweep completed at this state: commit a training row.
  row_seen_.insert(h);
  if (n_rows_ == row_values_.rows()) {
    row_values_.conservativeResize(std::max<Eigen::Index>(64, row_values_.rows() * 2),
                                   n_scenarios_);
  }
  row_values_.row(n_rows_) = p.values;
  row_states_.push_back(p.theta);
  ++n_rows_;
  partial_.erase(h);
}

double ProxyEngine::nn_query_subset(std::span<const int> subset, const State& theta,
                                    Evaluator& ev) {
  auto hit = nn_->nearest(theta);
  if (hit && hit->dist2 <= nn_cutoff_ * nn_cutoff_) {
    bool complete = true;
    for (int i : subset) {
      if (!nn_->row_has(hit->row, i)) {
        complete = false;
        break;
      }
    }
    if (complete) {
      double sum = 0.0;
      for (int i : subset) sum += nn_->row_value(hit->row, i);
      return sum;
    }
  }
  // Beyond the cut-off (or the nearest row lacks these scenarios): evaluate
  // for real. The listener hook inserts the results into the store.
  double sum = 0.0;
  for (int i : subset) sum += ev.scenario(i, theta);
  return sum;
}

void ProxyEngine::maybe_refit(std::uint64_t cumulative_cost) {
  if (cfg_.kind != ProxyKind::Quadratic && !want_bound_) return;
  if (frozen_) return;
  if (!schedule_.due(cumulative_cost, n_rows_, frozen_)) return;

  // Drop a quarter of the rows added since the last refit from the front of
  // the training set, so burn-in states are eventually forgotten.
  int added = n_rows_ - rows_at_last_refit_;
  if (quad_.fitted() && added > 0 && cfg_.drop_fraction > 0.0) {
    int drop = static_cast<int>(std::ceil(cfg_.drop_fraction * static_cast<double>(added)));
    drop = std::min(drop, n_rows_ - schedule_.trigger_min_states);
    if (drop > 0) {
      row_states_.erase(row_states_.begin(), row_states_.begin() + drop);
      Eigen::MatrixXd tail = row_values_.middleRows(drop, n_rows_ - drop);
      row_values_.topRows(n_rows_ - drop) = tail;
      n_rows_ -= drop;
    }
  }
  fit_now();
  rows_at_last_refit_ = n_rows_;
  schedule_.advance(cumulative_cost);
}

void ProxyEngine::fit_now() {
  Eigen::MatrixXd values = row_values_.topRows(n_rows_);
  if (want_bound_) {
    if (auto b = fit_firefly_bound(row_states_, values)) {
      bound_ = std::move(*b);
      quad_ = bound_.quad;
      ++refit_count_;
    }
    return;
  }
  if (auto q = fit_quadratic(row_states_, values)) {
    quad_ = std::move(*q);
    ++refit_count_;
  }
}

void ProxyEngine::end_step(const State& current) {
  if (partial_.empty()) return;
  auto keep = exact_state_hash(current);
  std::erase_if(partial_, [&](const auto& kv) { return kv.first != keep; });
}

}  // namespace subsetmc
