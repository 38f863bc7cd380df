#include "subsetmc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace subsetmc {

MvnFit fit_mvn(const Eigen::MatrixXd& sample) {
  const auto n = sample.rows();
  if (n < 2) throw std::invalid_argument("need at least two draws for an MVN fit");
  MvnFit fit;
  fit.mean = sample.colwise().mean();
  Eigen::MatrixXd centered = sample.rowwise() - fit.mean.transpose();
  fit.cov = centered.transpose() * centered / static_cast<double>(n - 1);
  return fit;
}

double kl_mvn_fit(const MvnFit& n1, const MvnFit& n2) {
  const auto d = n1.mean.size();
  Eigen::LLT<Eigen::MatrixXd> llt2(n2.cov);
  if (llt2.info() != Eigen::Success) {
    throw std::runtime_error(
        "reference covariance is singular; regularization is not applied silently - "
        "use a larger or better-mixed reference sample");
  }
  Eigen::LLT<Eigen::MatrixXd> llt1(n1.cov);
  if (llt1.info() != Eigen::Success) {
    throw std::runtime_error("sample covariance is singular (degenerate chain)");
  }
  auto log_det = [](const Eigen::LLT<Eigen::MatrixXd>& llt) {
    return 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
  };
  double trace = llt2.solve(n1.cov).trace();
  Eigen::VectorXd dm = n2.mean - n1.mean;
  double maha = dm.dot(llt2.solve(dm));
  return 0.5 * (trace + maha - static_cast<double>(d) + log_det(llt2) - log_det(llt1));
}

double kl_mvn(const Eigen::MatrixXd& sample, const Eigen::MatrixXd& reference) {
  if (sample.rows() < sample.cols() + 2 || reference.rows() < reference.cols() + 2) {
    throw std::invalid_argument("samples too small for a covariance fit");
  }
  return kl_mvn_fit(fit_mvn(sample), fit_mvn(reference));
}

double evals_per_step(double c, double n, double t) { return c / (n * t); }

double accept_per_eval(std::span<const double> alphas, double c, double n) {
  double sum = std::accumulate(alphas.begin(), alphas.end(), 0.0);
  return n / c * sum;
}

double variance_per_eval(std::span<const double> sq_jumps, double c, double n, double sigma0) {
  double sum = std::accumulate(sq_jumps.begin(), sq_jumps.end(), 0.0);
  return n / (c * sigma0 * sigma0) * sum;
}

std::optional<double> iact(std::span<const double> x, double window_factor) {
  const auto t = static_cast<Eigen::Index>(x.size());
  if (t < 8) return std::nullopt;
  Eigen::Map<const Eigen::VectorXd> v(x.data(), t);
  double mean = v.mean();
  Eigen::VectorXd centered = v.array() - mean;
  double c0 = centered.squaredNorm() / static_cast<double>(t);
  if (c0 <= 0.0) return std::nullopt;

  double tau = 1.0;
  const Eigen::Index max_lag = t / 3;
  for (Eigen::Index lag = 1; lag <= max_lag; ++lag) {
    double c = centered.head(t - lag).dot(centered.tail(t - lag)) / static_cast<double>(t);
    tau += 2.0 * c / c0;
    if (static_cast<double>(lag) >= window_factor * tau) return std::max(tau, 1e-12);
  }
  return std::max(tau, 1e-12);  // window never closed; best available estimate
}

std::optional<double> ess_per_eval(const Eigen::MatrixXd& states, double c, double n) {
  if (states.rows() < 50) return std::nullopt;
  std::optional<double> worst;
  const double t = static_cast<double>(states.rows());
  for (Eigen::Index d = 0; d < states.cols(); ++d) {
    std::vector<double> x(states.col(d).data(), states.col(d).data() + states.rows());
    auto tau = iact(x);
    if (!tau) continue;
    double ess = n * t / (c * *tau);
    if (!worst || ess < *worst) worst = ess;
  }
  return worst;
}

double gelman_rubin(const std::vector<Eigen::MatrixXd>& chains) {
  if (chains.size() < 2) throw std::invalid_argument("need at least two chains");
  const auto t = chains[0].rows();
  for (const auto& ch : chains) {
    if (ch.rows() != t) throw std::invalid_argument("chains must have equal lengths");
  }
  const auto d = chains[0].cols();
  Eigen::VectorXd pooled = Eigen::VectorXd::Zero(d);
  for (const auto& ch : chains) pooled += ch.colwise().mean().transpose();
  pooled /= static_cast<double>(chains.size());

  double w = 0.0, total = 0.0;
  for (const auto& ch : chains) {
    Eigen::VectorXd mean = ch.colwise().mean();
    w += (ch.rowwise() - mean.transpose()).squaredNorm() / static_cast<double>(t);
    total += (ch.rowwise() - pooled.transpose()).squaredNorm() / static_cast<double>(t);
  }
  w /= static_cast<double>(chains.size());
  total /= static_cast<double>(chains.size());
  if (w <= 0.0) throw std::invalid_argument("degenerate chains: zero within-chain variance");
  double b = std::max(0.0, total - w);
  return std::sqrt((w + b) / w);
}

MeasurementInterval measurement_interval(const ChainHistory& history,
                                         std::uint64_t budget_scenario_evals) {
  MeasurementInterval out;
  const std::uint64_t half = budget_scenario_evals / 2;
  std::uint64_t cum = 0;
  std::size_t first = history.steps.size();  // first step inside the interval
  for (std::size_t i = 0; i < history.steps.size(); ++i) {
    cum += history.steps[i].cost;
    if (cum > half && first == history.steps.size()) first = i;
  }
  if (first == 0) first = 1;  // the start entry is never an interval step
  std::size_t count = history.steps.size() - first;
  const auto dim = history.steps.empty() ? 0 : history.steps[0].theta.size();
  out.states.resize(static_cast<Eigen::Index>(count) + 1, dim);
  out.states.row(0) = history.steps[first - 1].theta.transpose();
  for (std::size_t i = first; i < history.steps.size(); ++i) {
    const auto& s = history.steps[i];
    out.states.row(static_cast<Eigen::Index>(i - first) + 1) = s.theta.transpose();
    out.alphas.push_back(s.alpha);
    out.sq_jumps.push_back(
        (s.theta - history.steps[i - 1].theta).squaredNorm());
    out.cost += s.cost;
  }
  out.steps = count;
  return out;
}

MetricBundle compute_metrics(const ChainHistory& history, int n_scenarios, double sigma0,
                             std::uint64_t budget_scenario_evals,
                             const Eigen::MatrixXd* reference) {
  MeasurementInterval mi = measurement_interval(history, budget_scenario_evals);
  MetricBundle m;
  m.interval_cost = mi.cost;
  m.interval_steps = mi.steps;
  if (mi.steps == 0 || mi.cost == 0) return m;
  const double c = static_cast<double>(mi.cost);
  const double n = static_cast<double>(n_scenarios);
  const double t = static_cast<double>(mi.steps);
  m.accept_prob = std::accumulate(mi.alphas.begin(), mi.alphas.end(), 0.0) / t;
  m.accept_per_eval = accept_per_eval(mi.alphas, c, n);
  m.evals_per_step = evals_per_step(c, n, t);
  m.variance_per_eval = variance_per_eval(mi.sq_jumps, c, n, sigma0);
  m.ess_per_eval = ess_per_eval(mi.states, c, n);
  if (reference) m.d_kl = kl_mvn(mi.states, *reference);
  return m;
}

double median_of(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty set");
  std::sort(values.begin(), values.end());
  std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

Aggregate aggregate_metric(std::span<const double> values, Rng& rng, int resamples) {
  if (values.size() < 2) throw std::invalid_argument("need at least two runs to aggregate");
  Aggregate out;
  out.median = median_of(std::vector<double>(values.begin(), values.end()));
  std::vector<double> meds(static_cast<std::size_t>(resamples));
  std::vector<double> draw(values.size());
  for (int r = 0; r < resamples; ++r) {
    for (auto& v : draw) v = values[rng.uniform_int(values.size())];
    meds[static_cast<std::size_t>(r)] = median_of(draw);
  }
  std::sort(meds.begin(), meds.end());
  auto q = [&](double p) {
    auto idx = static_cast<std::size_t>(p * static_cast<double>(meds.size() - 1));
    return meds[idx];
  };
  out.lo = q(0.05);
  out.hi = q(0.95);
  return out;
}

}  // namespace subsetmc
