#include "subsetmc/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "subsetmc/special.hpp"

namespace subsetmc {

namespace {

struct StepOutcome {
  State proposal;
  State new_theta;
  double alpha = 0.0;
  bool accepted = false;
};

double log_accept_ratio_to_alpha(double log_ratio) {
  if (std::isnan(log_ratio)) return 0.0;  // both sides -inf: degenerate
  return log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
}

class ChainBase {
 public:
  ChainBase(const ScenarioTarget& target, const SamplerSpec& spec, const RunConfig& cfg,
            const Proposal* proposal, bool want_bound)
      : target_(target),
        spec_(spec),
        cfg_(cfg),
        ev_(target_),
        proxy_(spec.proxy, target.dim, target.n_scenarios, target.sigma0, want_bound),
        ctrl_(make_controller_config(cfg)),
        rng_(Rng(cfg.seed).derive("chain")),
        cur_(cfg.start) {
    if (!is_finite(cur_)) throw std::invalid_argument("start state must be finite");
    if (!proposal) {
      owned_proposal_ = std::make_unique<RandomWalkProposal>(target.sigma0, target.dim);
      proposal_ = owned_proposal_.get();
    } else {
      proposal_ = proposal;
    }
    ev_.set_listener(&proxy_);
  }
  virtual ~ChainBase() = default;

  RunResult run() {
    RunResult out;
    const std::uint64_t budget = cfg_.budget_full_evals * static_cast<std::uint64_t>(target_.n_scenarios);
    ev_.counter().begin_step();
    init_chain();
    StepRecord start;
    start.theta = cur_;
    start.proposal = cur_;
    start.alpha = 1.0;
    start.action = -1;
    start.cost = ev_.counter().step_cost();
    start.accepted = true;
    out.init_evals = start.cost;
    out.history.steps.push_back(std::move(start));

    bool frozen = false;
    while (ev_.counter().total < budget) {
      if (cfg_.action_mode == ActionMode::Strict && !frozen &&
          ev_.counter().total >= budget / 2) {
        ctrl_.freeze();
        proxy_.freeze();
        frozen = true;
        out.frozen_action = ctrl_.choose_action(rng_);
      }
      ev_.counter().begin_step();
      step_overhead_ = 0;
      const State prev = cur_;
      int k = cfg_.action_mode == ActionMode::Fixed ? 0 : ctrl_.choose_action(rng_);
      StepOutcome o = step(ctrl_.multiplier(k));
      std::uint64_t cost = ev_.counter().step_cost();

      StepRecord rec;
      rec.theta = o.new_theta;
      rec.proposal = o.proposal;
      rec.alpha = o.alpha;
      rec.action = k;
      rec.cost = cost;
      rec.overhead_cost = step_overhead_;
      rec.accepted = o.accepted;
      out.history.steps.push_back(rec);

      double d = (o.proposal - prev).squaredNorm();
      ctrl_.record_step(d, k, o.alpha, cost - step_overhead_, step_overhead_);

      cur_ = o.new_theta;
      proxy_.maybe_refit(ev_.counter().total);
      ev_.end_step(cur_);
      proxy_.end_step(cur_);
    }
    out.total_evals = ev_.counter().total;
    out.bound_violations = bound_violations_;
    out.proxy_refits = proxy_.refit_count();
    finish(out);
    return out;
  }

 protected:
  virtual void init_chain() {}
  virtual StepOutcome step(double r) = 0;
  virtual void finish(RunResult&) {}

  State propose(double r) { return proposal_->propose(cur_, r, rng_); }

  // Standard MH decision given the log acceptance ratio; u ~ U[0,1).
  StepOutcome decide(const State& proposal, double log_ratio) {
    StepOutcome o;
    o.proposal = proposal;
    o.alpha = log_accept_ratio_to_alpha(log_ratio);
    o.accepted = o.alpha > rng_.uniform01();
    o.new_theta = o.accepted ? proposal : cur_;
    return o;
  }

  static ControllerConfig make_controller_config(const RunConfig& cfg) {
    if (cfg.action_mode == ActionMode::Fixed) {
      ControllerConfig c = cfg.controller;
      c.actions.multipliers = {cfg.fixed_multiplier};
      return c;
    }
    return cfg.controller;
  }

  const ScenarioTarget& target_;
  SamplerSpec spec_;
  RunConfig cfg_;
  Evaluator ev_;
  ProxyEngine proxy_;
  AdaptiveController ctrl_;
  Rng rng_;
  State cur_;
  std::uint64_t step_overhead_ = 0;
  int bound_violations_ = 0;
  const Proposal* proposal_ = nullptr;
  std::unique_ptr<Proposal> owned_proposal_;
};

// ---------------------------------------------------------------------------

class MhChain : public ChainBase {
 public:
  using ChainBase::ChainBase;

 protected:
  void init_chain() override { cur_logf_ = ev_.full_log_target(cur_); }

  StepOutcome step(double r) override {
    State prop = propose(r);
    double logf = ev_.full_log_target(prop);
    StepOutcome o = decide(prop, logf - cur_logf_);
    if (o.accepted) cur_logf_ = logf;
    return o;
  }

  double cur_logf_ = 0.0;
};

// ---------------------------------------------------------------------------

class SubsampleChain : public ChainBase {
 public:
  SubsampleChain(const ScenarioTarget& t, const SamplerSpec& s, const RunConfig& c,
                 const Proposal* p)
      : ChainBase(t, s, c, p, false) {
    size_ = s.subsample_size > 0 ? s.subsample_size : std::max(1, t.n_scenarios / 16);
    if (size_ < 1 || size_ > t.n_scenarios) throw std::invalid_argument("subsample size out of range");
    indices_.resize(static_cast<std::size_t>(t.n_scenarios));
    std::iota(indices_.begin(), indices_.end(), 0);
  }

 protected:
  StepOutcome step(double r) override {
    State prop = propose(r);
    rng_.shuffle(indices_);
    std::span<const int> subset(indices_.data(), static_cast<std::size_t>(size_));
    const double scale = static_cast<double>(target_.n_scenarios) / static_cast<double>(size_);
    double v_cur = scale * ev_.subset_log_target(subset, cur_, 0.0) + target_.prior_at(cur_);
    double v_prop = scale * ev_.subset_log_target(subset, prop, 0.0) + target_.prior_at(prop);
    return decide(prop, v_prop - v_cur);
  }

  int size_ = 0;
  std::vector<int> indices_;
};

// ---------------------------------------------------------------------------

// Shared machinery for the two statistical-test samplers: a fresh uniform
// draw fixes the MH threshold for the whole step, and the subset ladder grows
// geometrically from N/16, reusing evaluations, until the test decides or the
// full set is reached.
class LadderChainBase : public ChainBase {
 public:
  LadderChainBase(const ScenarioTarget& t, const SamplerSpec& s, const RunConfig& c,
                  const Proposal* p)
      : ChainBase(t, s, c, p, false) {
    min_subset_ = s.min_subset > 0 ? s.min_subset : std::max(1, t.n_scenarios / 16);
    indices_.resize(static_cast<std::size_t>(t.n_scenarios));
    std::iota(indices_.begin(), indices_.end(), 0);
  }

 protected:
  std::vector<int> ladder() const {
    std::vector<int> out;
    int b = std::min(min_subset_, target_.n_scenarios);
    for (;;) {
      out.push_back(b);
      if (b >= target_.n_scenarios) break;
      b = std::min(target_.n_scenarios,
                   static_cast<int>(std::ceil(spec_.subset_growth * static_cast<double>(b))));
    }
    return out;
  }

  // log threshold common to both samplers: mu0 = (log u + log p(cur) -
  // log p(prop)) / N for a symmetric proposal.
  double mu0(const State& prop, double u) const {
    double t = std::log(u);
    if (target_.has_prior()) t += target_.prior_at(cur_) - target_.prior_at(prop);
    return t / static_cast<double>(target_.n_scenarios);
  }

  double prior_diff(const State& prop) const {
    return target_.has_prior() ? target_.prior_at(prop) - target_.prior_at(cur_) : 0.0;
  }

  int min_subset_ = 0;
  std::vector<int> indices_;
};

class AusterityChain : public LadderChainBase {
 public:
  using LadderChainBase::LadderChainBase;

 protected:
  StepOutcome step(double r) override {
    State prop = propose(r);
    const int n = target_.n_scenarios;
    double u = rng_.uniform01();
    double m0 = mu0(prop, u);
    rng_.shuffle(indices_);

    std::vector<double> diffs;
    diffs.reserve(static_cast<std::size_t>(n));
    bool accept = false;
    double lambda = 0.0;
    for (int b : ladder()) {
      while (static_cast<int>(diffs.size()) < b) {
        int i = indices_[diffs.size()];
        diffs.push_back(ev_.scenario(i, prop) - ev_.scenario(i, cur_));
      }
      double mean = std::accumulate(diffs.begin(), diffs.end(), 0.0) / b;
      lambda = mean;
      if (b >= n) {
        accept = mean > m0;
        break;
      }
      double ss = 0.0;
      for (double d : diffs) ss += (d - mean) * (d - mean);
      double sb = b > 1 ? std::sqrt(ss / (b - 1)) : 0.0;
      double shat = sb / std::sqrt(static_cast<double>(b)) *
                    std::sqrt(1.0 - static_cast<double>(b - 1) / static_cast<double>(n - 1));
      if (shat == 0.0) {
        accept = mean > m0;  // degenerate-variance rule
        break;
      }
      if (b >= 2) {
        double t = (mean - m0) / shat;
        if (student_t_two_tail(std::fabs(t), static_cast<double>(b - 1)) <
            spec_.austerity_pvalue) {
          accept = mean > m0;
          break;
        }
      }
    }

    StepOutcome o;
    o.proposal = prop;
    o.alpha = log_accept_ratio_to_alpha(static_cast<double>(n) * lambda + prior_diff(prop));
    o.accepted = accept;
    o.new_theta = accept ? prop : cur_;
    return o;
  }
};

class ConfidenceChain : public LadderChainBase {
 public:
  using LadderChainBase::LadderChainBase;

 protected:
  // Per-scenario proxy difference, zero when no proxy is available.
  double proxy_diff(int i, const State& prop) {
    switch (spec_.proxy.kind) {
      case ProxyKind::Quadratic:
        if (!proxy_.quad_ready()) return 0.0;
        return proxy_.quad().query_scenario(i, prop) - proxy_.quad().query_scenario(i, cur_);
      case ProxyKind::Nearest: {
        if (!proxy_.ready()) return 0.0;
        int idx[1] = {i};
        std::span<const int> s(idx, 1);
        return proxy_.nn_query_subset(s, prop, ev_) - proxy_.nn_query_subset(s, cur_, ev_);
      }
      default:
        return 0.0;
    }
  }

  StepOutcome step(double r) override {
    State prop = propose(r);
    const int n = target_.n_scenarios;
    double u = rng_.uniform01();
    double m0 = mu0(prop, u);
    rng_.shuffle(indices_);

    // Control-variate estimate: Lambda = (1/N) sum proxy_diff + mean residual.
    double proxy_total = 0.0;
    std::vector<double> pdiff(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      pdiff[static_cast<std::size_t>(i)] = proxy_diff(i, prop);
      proxy_total += pdiff[static_cast<std::size_t>(i)];
    }
    proxy_total /= static_cast<double>(n);

    std::vector<double> resid;
    resid.reserve(static_cast<std::size_t>(n));
    bool accept = false;
    double lambda_hat = 0.0;
    int stage = 0;
    for (int b : ladder()) {
      ++stage;
      while (static_cast<int>(resid.size()) < b) {
        int i = indices_[resid.size()];
        double actual = ev_.scenario(i, prop) - ev_.scenario(i, cur_);
        resid.push_back(actual - pdiff[static_cast<std::size_t>(i)]);
      }
      double mean = std::accumulate(resid.begin(), resid.end(), 0.0) / b;
      lambda_hat = proxy_total + mean;
      if (b >= n) {
        accept = lambda_hat > m0;
        break;
      }
      // Empirical Bernstein half-width on the residuals; the error budget
      // delta is apportioned geometrically over the ladder stages.
      double delta_l = spec_.confidence_delta * std::pow(0.5, stage);
      double lg = std::log(3.0 / delta_l);
      double ss = 0.0, lo = resid[0], hi = resid[0];
      for (double g : resid) {
        ss += (g - mean) * (g - mean);
        lo = std::min(lo, g);
        hi = std::max(hi, g);
      }
      double sb = b > 1 ? std::sqrt(ss / (b - 1)) : 0.0;
      double range = hi - lo;
      double c = sb * std::sqrt(2.0 * lg / b) + 3.0 * range * lg / b;
      if (lambda_hat - c > m0) {
        accept = true;
        break;
      }
      if (lambda_hat + c < m0) {
        accept = false;
        break;
      }
    }

    StepOutcome o;
    o.proposal = prop;
    o.alpha = log_accept_ratio_to_alpha(static_cast<double>(n) * lambda_hat + prior_diff(prop));
    o.accepted = accept;
    o.new_theta = accept ? prop : cur_;
    return o;
  }
};

// ---------------------------------------------------------------------------

class FireflyChain : public ChainBase {
 public:
  FireflyChain(const ScenarioTarget& t, const SamplerSpec& s, const RunConfig& c,
               const Proposal* p)
      : ChainBase(t, s, c, p, /*want_bound=*/true) {
    if (s.proxy.kind == ProxyKind::Nearest) {
      throw std::invalid_argument("firefly requires a quadratic lower bound, not nearest");
    }
    z_.assign(static_cast<std::size_t>(t.n_scenarios), 1);
  }

 protected:
  void init_chain() override { cur_logf_ = ev_.full_log_target(cur_); }

  void resample(std::span<const int> which) {
    const std::uint64_t before = ev_.counter().total;
    for (int i : which) {
      double l = ev_.scenario(i, cur_);
      double b = proxy_.bound().log_bound(i, cur_);
      double p_bright;
      if (b >= l) {
        if (b > l) ++bound_violations_;
        p_bright = 0.0;
      } else {
        p_bright = -std::expm1(b - l);  // 1 - exp(b - l) = (L - B) / L
      }
      z_[static_cast<std::size_t>(i)] = rng_.uniform01() < p_bright ? 1 : 0;
    }
    step_overhead_ += ev_.counter().total - before;
  }

  double augmented_log_target(const State& theta, bool& violated) {
    double total = target_.prior_at(theta);
    for (int i = 0; i < target_.n_scenarios; ++i) {
      double b = proxy_.bound().log_bound(i, theta);
      if (z_[static_cast<std::size_t>(i)]) {
        double l = ev_.scenario(i, theta);
        double bright = log_sub(l, b);
        if (bright == kNegInf) violated = true;
        total += bright;
      } else {
        total += b;
      }
    }
    return total;
  }

  StepOutcome step(double r) override {
    if (!proxy_.bound_ready()) {
      // Plain MCMC while training rows accumulate.
      State prop = propose(r);
      double logf = ev_.full_log_target(prop);
      StepOutcome o = decide(prop, logf - cur_logf_);
      if (o.accepted) cur_logf_ = logf;
      bound_epoch_ = proxy_.refit_count();
      return o;
    }

    // Ahead of a due refit, make a full evaluation at the current state so
    // the training set keeps tracking the sampled region; the cost is
    // overhead, not attributable to the action.
    if (proxy_.refit_due(ev_.counter().total)) {
      const std::uint64_t before = ev_.counter().total;
      ev_.full_log_target(cur_);
      step_overhead_ += ev_.counter().total - before;
    }

    // (a) Resample a fraction of the auxiliaries; after a bound refit all of
    // them, so stale brightness against the new bound cannot persist.
    if (proxy_.refit_count() != bound_epoch_) {
      bound_epoch_ = proxy_.refit_count();
      std::vector<int> all(static_cast<std::size_t>(target_.n_scenarios));
      std::iota(all.begin(), all.end(), 0);
      resample(all);
    } else if (spec_.firefly_resample_period > 0 &&
               steps_since_resample_ + 1 >= spec_.firefly_resample_period) {
      int m = std::max(1, static_cast<int>(std::lround(
                              spec_.firefly_resample_fraction * target_.n_scenarios)));
      std::vector<int> all(static_cast<std::size_t>(target_.n_scenarios));
      std::iota(all.begin(), all.end(), 0);
      rng_.shuffle(all);
      all.resize(static_cast<std::size_t>(m));
      resample(all);
      steps_since_resample_ = 0;
    } else {
      ++steps_since_resample_;
    }

    // (b) One MH step on the augmented target; dark scenarios cost nothing.
    State prop = propose(r);
    bool viol_cur = false, viol_prop = false;
    double f_cur = augmented_log_target(cur_, viol_cur);
    double f_prop = augmented_log_target(prop, viol_prop);
    if (viol_prop) ++bound_violations_;
    StepOutcome o = decide(prop, f_prop - f_cur);
    return o;
  }

  std::vector<char> z_;
  double cur_logf_ = 0.0;
  int bound_epoch_ = 0;
  int steps_since_resample_ = 0;
};

}  // namespace

HintsTree resolve_hints_tree(int n, const HintsConfig& cfg) {
  HintsTree t;
  t.n = n;
  t.leaf_size = cfg.leaf_size > 0 ? cfg.leaf_size : std::max(1, n / 16);
  if (n % t.leaf_size != 0) throw std::invalid_argument("leaf size must divide N");
  int n_leaves = n / t.leaf_size;
  if (!cfg.branch.empty()) {
    t.branch = cfg.branch;
    int prod = 1;
    for (int m : t.branch) prod *= m;
    if (prod != n_leaves) throw std::invalid_argument("branch factors must multiply to N/leaf");
  } else {
    int rest = n_leaves;
    while (rest > 1) {
      int m = rest % 4 == 0 ? 4 : rest;
      t.branch.push_back(m);
      rest /= m;
    }
  }
  t.block.resize(t.branch.size() + 1);
  t.block[0] = t.leaf_size;
  for (std::size_t h = 0; h < t.branch.size(); ++h) {
    t.block[h + 1] = t.block[h] * t.branch[h];
  }
  return t;
}

namespace {

class HintsChain : public ChainBase {
 public:
  HintsChain(const ScenarioTarget& t, const SamplerSpec& s, const RunConfig& c,
             const Proposal* p, bool keep_trace)
      : ChainBase(t, s, c, p, false),
        tree_(resolve_hints_tree(t.n_scenarios, s.hints)),
        keep_trace_(keep_trace),
        target_copy_(t) {
    downsample_ = s.hints.downsample.value_or(default_downsample(s.proxy.kind));
    mode_ = s.hints.mode.value_or(default_mode(s.proxy.kind));
    if (s.proxy.kind == ProxyKind::None) mode_ = HintsProxyMode::None;
  }

  static bool default_downsample(ProxyKind k) { return k != ProxyKind::Quadratic; }
  static HintsProxyMode default_mode(ProxyKind k) {
    switch (k) {
      case ProxyKind::Quadratic:
        return HintsProxyMode::ProxyParent;
      case ProxyKind::Nearest:
        return HintsProxyMode::ProxyOwn;
      default:
        return HintsProxyMode::None;
    }
  }

 protected:
  void init_chain() override { ev_.full_log_target(cur_); }

  std::span<const int> block(int level, int node) const {
    int size = tree_.block[static_cast<std::size_t>(level)];
    return {target_copy_.permutation.data() + static_cast<std::ptrdiff_t>(node) * size,
            static_cast<std::size_t>(size)};
  }

  double log_f(int level, int node, const State& theta) {
    const int top = tree_.height();
    if (level == top) return ev_.full_log_target(theta);

    HintsProxyMode mode = proxy_.ready() ? mode_ : HintsProxyMode::None;
    const double n = static_cast<double>(target_.n_scenarios);
    auto own = block(level, node);
    int parent_node = node / tree_.branch[static_cast<std::size_t>(level)];
    auto parent = block(level + 1, parent_node);

    auto proxy_sum = [&](std::span<const int> subset) {
      if (spec_.proxy.kind == ProxyKind::Quadratic) return proxy_.quad().query(subset, theta);
      return proxy_.nn_query_subset(subset, theta, ev_);
    };

    switch (mode) {
      case HintsProxyMode::None:
        return ev_.subset_log_target(own, theta, static_cast<double>(own.size()) / n);
      case HintsProxyMode::SubsetPlusAll: {
        std::vector<int> rest = complement(own, target_.n_scenarios);
        return ev_.subset_log_target(own, theta, 0.0) + proxy_sum(rest) + target_.prior_at(theta);
      }
      case HintsProxyMode::SubsetPlusParent: {
        std::vector<int> rest = difference(parent, own);
        return ev_.subset_log_target(own, theta, 0.0) + proxy_sum(rest) +
               (static_cast<double>(parent.size()) / n) * target_.prior_at(theta);
      }
      case HintsProxyMode::ProxyOwn:
        return proxy_sum(own) + (static_cast<double>(own.size()) / n) * target_.prior_at(theta);
      case HintsProxyMode::ProxyParent:
        return proxy_sum(parent) + (static_cast<double>(parent.size()) / n) * target_.prior_at(theta);
    }
    return kNegInf;
  }

  static std::vector<int> complement(std::span<const int> subset, int n) {
    std::vector<bool> in(static_cast<std::size_t>(n), false);
    for (int i : subset) in[static_cast<std::size_t>(i)] = true;
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(n) - subset.size());
    for (int i = 0; i < n; ++i) {
      if (!in[static_cast<std::size_t>(i)]) out.push_back(i);
    }
    return out;
  }

  static std::vector<int> difference(std::span<const int> parent, std::span<const int> own) {
    std::vector<int> out;
    out.reserve(parent.size() - own.size());
    for (int i : parent) {
      if (std::find(own.begin(), own.end(), i) == own.end()) out.push_back(i);
    }
    return out;
  }

  struct MoveResult {
    State theta;
    double psi_log = 0.0;
  };

  MoveResult hints_move(int level, int node, const State& theta_in, double r) {
    State prop;
    double psi_log = 0.0;
    if (level == 0) {
      prop = propose_from(theta_in, r);
      // symmetric primitive kernel: asymmetry ratio 1
    } else {
      State theta = theta_in;
      int m = tree_.branch[static_cast<std::size_t>(level - 1)];
      std::vector<int> children(static_cast<std::size_t>(m));
      std::iota(children.begin(), children.end(), node * m);
      rng_.shuffle(children);
      if (downsample_) children.resize(static_cast<std::size_t>((m + 1) / 2));
      for (int c : children) {
        MoveResult mr = hints_move(level - 1, c, theta, r);
        theta = mr.theta;
        psi_log += mr.psi_log;
      }
      prop = theta;
    }

    if (prop == theta_in) {
      // Zero move: accepted with ratio 1, no evaluations needed.
      trace(level, node, theta_in, theta_in, 0.0, true, true);
      return {theta_in, 0.0};
    }

    double f_in = log_f(level, node, theta_in);
    double f_prop = log_f(level, node, prop);
    double log_ratio = f_prop - f_in + psi_log;
    double alpha = log_accept_ratio_to_alpha(log_ratio);
    if (alpha > rng_.uniform01()) {
      trace(level, node, theta_in, prop, f_in - f_prop, true, false);
      return {prop, f_in - f_prop};
    }
    trace(level, node, theta_in, theta_in, 0.0, false, false);
    return {theta_in, 0.0};
  }

  State propose_from(const State& theta, double r) { return proposal_->propose(theta, r, rng_); }

  void trace(int level, int node, const State& in, const State& out, double psi_log,
             bool accepted, bool zero) {
    if (!keep_trace_) return;
    trace_.push_back(HintsTraceItem{level, node, in, out, psi_log, accepted, zero});
  }

  StepOutcome step(double r) override {
    shuffle_scenarios(target_copy_, rng_);
    const int top = tree_.height();

    // Root-level composite proposal (unrolled so the record is explicit).
    State theta = cur_;
    double psi_log = 0.0;
    int m = tree_.branch[static_cast<std::size_t>(top - 1)];
    std::vector<int> children(static_cast<std::size_t>(m));
    std::iota(children.begin(), children.end(), 0);
    rng_.shuffle(children);
    if (downsample_) children.resize(static_cast<std::size_t>((m + 1) / 2));
    for (int c : children) {
      MoveResult mr = hints_move(top - 1, c, theta, r);
      theta = mr.theta;
      psi_log += mr.psi_log;
    }

    StepOutcome o;
    o.proposal = theta;
    if (theta == cur_) {
      // Zero move at the root: always accepted, counted as a rejection.
      o.alpha = 0.0;
      o.accepted = false;
      o.new_theta = cur_;
      return o;
    }
    double f_in = ev_.full_log_target(cur_);
    double f_prop = ev_.full_log_target(theta);
    double log_ratio = f_prop - f_in + psi_log;
    o.alpha = log_accept_ratio_to_alpha(log_ratio);
    o.accepted = o.alpha > rng_.uniform01();
    o.new_theta = o.accepted ? theta : cur_;
    return o;
  }

  void finish(RunResult& out) override { out.hints_trace = std::move(trace_); }

  HintsTree tree_;
  bool keep_trace_ = false;
  bool downsample_ = true;
  HintsProxyMode mode_ = HintsProxyMode::None;
  ScenarioTarget target_copy_;
  std::vector<HintsTraceItem> trace_;
};

}  // namespace

RunResult run_chain(const ScenarioTarget& target, const SamplerSpec& spec, const RunConfig& cfg,
                    const Proposal* proposal, bool keep_hints_trace) {
  if (cfg.budget_full_evals == 0) throw std::invalid_argument("budget must be positive");
  if (spec.kind == "mcmc") {
    return MhChain(target, spec, cfg, proposal, false).run();
  }
  if (spec.kind == "subsample") {
    if (cfg.action_mode != ActionMode::Fixed) {
      throw std::invalid_argument(
          "subsample MCMC must run at a fixed proposal scale (adaptive step sizes can yield "
          "arbitrarily poor samples)");
    }
    return SubsampleChain(target, spec, cfg, proposal).run();
  }
  if (spec.kind == "austerity") return AusterityChain(target, spec, cfg, proposal).run();
  if (spec.kind == "confidence") return ConfidenceChain(target, spec, cfg, proposal).run();
  if (spec.kind == "firefly") return FireflyChain(target, spec, cfg, proposal).run();
  if (spec.kind == "hints") return HintsChain(target, spec, cfg, proposal, keep_hints_trace).run();
  throw std::invalid_argument("unknown sampler kind: " + spec.kind +
                              " (expected mcmc|subsample|austerity|confidence|firefly|hints)");
}

}  // namespace subsetmc
