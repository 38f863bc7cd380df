// Run metrics, computed over the measurement interval (the second half of a
// run by computational resource consumed).
#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <vector>

#include "subsetmc/chain.hpp"

namespace subsetmc {

struct MvnFit {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;  // unbiased sample covariance
};

MvnFit fit_mvn(const Eigen::MatrixXd& sample);  // rows are draws

// KL divergence between MVN fits, N1 fitted to `sample`, N2 to `reference`.
// Throws when the reference covariance is singular (no silent jitter).
double kl_mvn(const Eigen::MatrixXd& sample, const Eigen::MatrixXd& reference);
double kl_mvn_fit(const MvnFit& n1, const MvnFit& n2);

double evals_per_step(double c, double n, double t);
double accept_per_eval(std::span<const double> alphas, double c, double n);
double variance_per_eval(std::span<const double> sq_jumps, double c, double n, double sigma0);

// Integrated autocorrelation time with a self-consistent window cutoff
// (smallest P with P >= c * tau(P)); nullopt for degenerate series.
std::optional<double> iact(std::span<const double> x, double window_factor = 5.0);

// Minimum across dimensions of N*T/(C*tau_d); nullopt when T < 50 or all
// dimensions are degenerate.
std::optional<double> ess_per_eval(const Eigen::MatrixXd& states, double c, double n);

// sqrt((W+B)/W): W the mean squared distance to each chain's own mean, B the
// between-chain excess of the pooled spread. Throws when W == 0.
double gelman_rubin(const std::vector<Eigen::MatrixXd>& chains);

struct MetricBundle {
  double accept_prob = 0.0;
  double accept_per_eval = 0.0;
  double evals_per_step = 0.0;
  double variance_per_eval = 0.0;
  std::optional<double> ess_per_eval;
  std::optional<double> d_kl;
  std::uint64_t interval_cost = 0;
  std::size_t interval_steps = 0;
};

// Slice of a run covering the measurement interval: steps whose cumulative
// cost exceeds half the budget (in scenario evaluations).
struct MeasurementInterval {
  Eigen::MatrixXd states;          // T+1 rows: theta_0 then the interval's steps
  std::vector<double> alphas;      // length T
  std::vector<double> sq_jumps;    // realized ||theta_t - theta_{t-1}||^2
  std::uint64_t cost = 0;
  std::size_t steps = 0;
};
MeasurementInterval measurement_interval(const ChainHistory& history,
                                         std::uint64_t budget_scenario_evals);

MetricBundle compute_metrics(const ChainHistory& history, int n_scenarios, double sigma0,
                             std::uint64_t budget_scenario_evals,
                             const Eigen::MatrixXd* reference);

// Median with percentile-bootstrap 5th/95th CIs of the median.
struct Aggregate {
  double median = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};
Aggregate aggregate_metric(std::span<const double> values, Rng& rng, int resamples = 10000);

double median_of(std::vector<double> values);

}  // namespace subsetmc
