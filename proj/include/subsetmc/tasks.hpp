// Benchmark targets.
//
// Disease: a stochastic two-compartment reduction of the SEIRS model whose
// scenario likelihoods come from particle-filter runs over simulated count
// series, memoised on a 1e-3 grid in the encoded parameter space. Synthetic:
// a scalable Poisson task with matched noise characteristics and variants for
// smoothness, correlation and tall data. Every scenario likelihood is a
// deterministic function of (scenario, state) through grid-fixed seeds.
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "subsetmc/special.hpp"
#include "subsetmc/target.hpp"

namespace subsetmc {

struct Task {
  std::string name;
  ScenarioTarget target;
  State true_state;
  double resolution = 1e-3;
};

// --- SEIRS model -----------------------------------------------------------

struct SeirsRates {
  double beta = 0.0, delta = 0.0, gamma = 0.0, epsilon = 0.0;
};

struct SeirsTrajectory {
  std::vector<long> s, e, i, r;  // compartment counts per step (index 0 = start)
  std::vector<long> obs;         // y_t ~ Poisson(I_t), one per transition step
};

// Simulates the four-compartment stochastic SEIRS model with binomial
// transitions; probabilities are 1 - exp(-rate), with the S->E rate scaled by
// the infected fraction.
SeirsTrajectory seirs_simulate(const SeirsRates& rates, long n_pop, long e0, long i0,
                               int steps, Rng& rng);

// Encoded parameter space: theta = logit(1 - exp(-rate)) per dimension, so
// decode gives rate = -log(1 - sigmoid(theta)).
double encode_rate(double rate);
double decode_rate(double theta);

// --- generic bootstrap particle filter --------------------------------------

// Log likelihood estimate sum_j w_t^j / N_x of an observation sequence, with
// stratified resampling on every step and log-sum-exp weight handling.
// Returns -inf when all particle weights vanish at some step.
template <class Particle, class InitFn, class TransFn, class ObsFn>
double particle_filter_loglik(int n_particles, std::span<const long> obs, InitFn&& init,
                              TransFn&& transition, ObsFn&& obs_loglik, Rng& rng) {
  std::vector<Particle> parts(static_cast<std::size_t>(n_particles));
  std::vector<Particle> next(static_cast<std::size_t>(n_particles));
  for (auto& p : parts) p = init(rng);
  std::vector<double> lw(static_cast<std::size_t>(n_particles));
  std::vector<double> w(static_cast<std::size_t>(n_particles));
  double total = 0.0;
  for (long y : obs) {
    double m = kNegInf;
    for (std::size_t j = 0; j < parts.size(); ++j) {
      parts[j] = transition(parts[j], rng);
      lw[j] = obs_loglik(y, parts[j]);
      if (lw[j] > m) m = lw[j];
    }
    if (m == kNegInf) return kNegInf;
    double sum = 0.0;
    for (std::size_t j = 0; j < parts.size(); ++j) {
      w[j] = std::exp(lw[j] - m);
      sum += w[j];
    }
    total += m + std::log(sum) - std::log(static_cast<double>(n_particles));
    // Kitagawa's stratified resampling; the weight sum is preserved by
    // construction since `total` already banked this step's estimate.
    double cum = w[0];
    std::size_t idx = 0;
    for (std::size_t k = 0; k < parts.size(); ++k) {
      double pos = (static_cast<double>(k) + rng.uniform01()) /
                   static_cast<double>(n_particles) * sum;
      while (cum < pos && idx + 1 < parts.size()) cum += w[++idx];
      next[k] = parts[idx];
    }
    std::swap(parts, next);
  }
  return total;
}

// --- disease task (2-D reduction) -------------------------------------------

struct DiseaseConfig {
  int n_scenarios = 64;
  long n_pop = 1000;
  int n_particles = 500;  // paper scale: 4000
  int horizon = 20;
  double beta = 0.4;   // generating infection rate
  double gamma = 0.2;  // generating recovery rate
  double sigma0 = 0.05;
  double resolution = 1e-3;
  std::uint64_t seed = 1;
};

struct SiSeries {
  std::vector<long> obs;
  long i0 = 0;
  int warmup = 0;
};

struct DiseaseData {
  DiseaseConfig cfg;
  std::vector<SiSeries> series;
};

DiseaseData generate_disease_data(const DiseaseConfig& cfg);

// Whole-run memo of PF log likelihoods per (scenario, grid cell); sharable
// across chains (value store only - each chain keeps its own cost scope).
class DiseaseMemo {
 public:
  double get_or_compute(std::uint64_t cell_key, int scenario, int n_scenarios,
                        const std::function<double()>& compute);

 private:
  std::mutex mu_;
  std::unordered_map<std::uint64_t, std::vector<double>> cells_;
};

Task make_disease_task(std::shared_ptr<const DiseaseData> data,
                       std::shared_ptr<DiseaseMemo> memo = nullptr);
Task make_disease_task(const DiseaseConfig& cfg);

// --- synthetic task ----------------------------------------------------------

enum class SyntheticVariant { Standard, Smooth, Correlated, Extreme, Tall };

struct SyntheticConfig {
  int dim = 4;
  SyntheticVariant variant = SyntheticVariant::Standard;
  int n_scenarios = 64;
  std::uint64_t seed = 1;
  double zeta = 0.0;       // correlation mix; set by variant when 0
  int n_reps = 0;          // Poisson realisations per likelihood; variant default
  double n_pop = 0.0;      // 0 -> 1250 * D (1e5 for tall)
  int batch = 0;           // data points per scenario; 250 for tall
  double z_scale = 0.0;    // latent mean scale; 1e-4 for tall
  double prior_var = 0.0;  // spherical Normal prior variance; 0 -> no prior
  double sigma0 = 0.02;
  double resolution = 1e-3;
};

// Fills variant-dependent defaults (n_pop, n_reps, batch, zeta, prior).
SyntheticConfig normalize(SyntheticConfig cfg);

struct SyntheticData {
  SyntheticConfig cfg;  // normalized
  Eigen::MatrixXd weights;            // N x D, rows sum to 1, two non-zeros pre-mix
  std::vector<std::vector<long>> obs;  // N scenarios x batch counts
};

SyntheticData generate_synthetic_data(const SyntheticConfig& cfg);
Task make_synthetic_task(std::shared_ptr<const SyntheticData> data);
Task make_synthetic_task(const SyntheticConfig& cfg);

// Phase offset of repetition r's seed grid, in [0, resolution).
double rep_phase(std::uint64_t seed, int rep, double resolution);

// --- 1-D motivating example --------------------------------------------------

struct MotivatingConfig {
  int n_scenarios = 256;
  double theta_true = 0.541;
  std::uint64_t seed = 1;
  double sigma0 = 0.05;
  double resolution = 1e-3;
};
Task make_motivating_task(const MotivatingConfig& cfg = {});

// --- analytic toy (harness validation) ---------------------------------------

// Single-scenario Gaussian log likelihood in 1-D; exact posterior N(mean, sd^2).
Task make_gaussian_task(double mean, double sd, double sigma0);

}  // namespace subsetmc
