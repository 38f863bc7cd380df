#include "subsetmc/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace subsetmc {

double encode_rate(double rate) { return logit(-std::expm1(-rate)); }
double decode_rate(double theta) { return -std::log1p(-sigmoid(theta)); }

SeirsTrajectory seirs_simulate(const SeirsRates& rates, long n_pop, long e0, long i0,
                               int steps, Rng& rng) {
  SeirsTrajectory tr;
  long s = n_pop - e0 - i0, e = e0, i = i0, r = 0;
  tr.s.push_back(s);
  tr.e.push_back(e);
  tr.i.push_back(i);
  tr.r.push_back(r);
  const double p_ei = -std::expm1(-rates.delta);
  const double p_ir = -std::expm1(-rates.gamma);
  const double p_rs = -std::expm1(-rates.epsilon);
  for (int t = 0; t < steps; ++t) {
    double p_se = -std::expm1(-rates.beta * static_cast<double>(i) / static_cast<double>(n_pop));
    long n_se = rng.binomial(s, p_se);
    long n_ei = rng.binomial(e, p_ei);
    long n_ir = rng.binomial(i, p_ir);
    long n_rs = rng.binomial(r, p_rs);
    s = s - n_se + n_rs;
    e = e + n_se - n_ei;
    i = i + n_ei - n_ir;
    r = r + n_ir - n_rs;
    tr.s.push_back(s);
    tr.e.push_back(e);
    tr.i.push_back(i);
    tr.r.push_back(r);
    tr.obs.push_back(rng.poisson(static_cast<double>(i)));
  }
  return tr;
}

namespace {

// One step of the two-compartment (S, I) reduction; returns the new infected
// count. p_is is the constant I->S probability, beta the infection rate.
long si_step(long i, long n_pop, double beta, double p_is, Rng& rng) {
  long s = n_pop - i;
  double p_si = -std::expm1(-beta * static_cast<double>(i) / static_cast<double>(n_pop));
  long n_si = rng.binomial(s, p_si);
  long n_is = rng.binomial(i, p_is);
  return i + n_si - n_is;
}

}  // namespace

DiseaseData generate_disease_data(const DiseaseConfig& cfg) {
  DiseaseData data;
  data.cfg = cfg;
  Rng rng = Rng(cfg.seed).derive("disease-data");
  const double p_is = -std::expm1(-cfg.gamma);
  const long lo = cfg.n_pop / 20, hi = cfg.n_pop / 10;
  for (int sc = 0; sc < cfg.n_scenarios; ++sc) {
    SiSeries series;
    series.i0 = lo + static_cast<long>(rng.uniform_int(static_cast<std::uint64_t>(hi - lo + 1)));
    series.warmup = static_cast<int>(rng.uniform_int(10));
    long i = series.i0;
    for (int t = 0; t < series.warmup; ++t) i = si_step(i, cfg.n_pop, cfg.beta, p_is, rng);
    for (int t = 0; t < cfg.horizon; ++t) {
      i = si_step(i, cfg.n_pop, cfg.beta, p_is, rng);
      series.obs.push_back(rng.poisson(static_cast<double>(i)));
    }
    data.series.push_back(std::move(series));
  }
  return data;
}

double DiseaseMemo::get_or_compute(std::uint64_t cell_key, int scenario, int n_scenarios,
                                   const std::function<double()>& compute) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cells_.find(cell_key);
    if (it != cells_.end() && !std::isnan(it->second[static_cast<std::size_t>(scenario)])) {
      return it->second[static_cast<std::size_t>(scenario)];
    }
  }
  double value = compute();
  std::lock_guard<std::mutex> lock(mu_);
  auto& cell = cells_[cell_key];
  if (cell.empty()) {
    cell.assign(static_cast<std::size_t>(n_scenarios), std::numeric_limits<double>::quiet_NaN());
  }
  cell[static_cast<std::size_t>(scenario)] = value;
  return cell[static_cast<std::size_t>(scenario)];
}

namespace {

// PF likelihood of one series at the grid-snapped state. Deterministic: the
// PF seed is fixed by (task seed, scenario, grid cell).
double disease_pf_loglik(const DiseaseData& data, int scenario,
                         const Eigen::Array<std::int64_t, Eigen::Dynamic, 1>& cells) {
  const DiseaseConfig& cfg = data.cfg;
  // Snap to the cell centre; the likelihood is piecewise constant on cells.
  State snapped(2);
  snapped[0] = (static_cast<double>(cells[0]) + 0.5) * cfg.resolution;
  snapped[1] = (static_cast<double>(cells[1]) + 0.5) * cfg.resolution;
  const double beta = decode_rate(snapped[0]);
  const double p_is = sigmoid(snapped[1]);  // 1 - exp(-gamma) with gamma = decode(theta1)

  std::uint64_t seed = hash_combine(hash_label(kFnvOffset, "pf-run"), cfg.seed);
  seed = hash_combine(seed, static_cast<std::uint64_t>(scenario));
  seed = hash_combine(seed, static_cast<std::uint64_t>(cells[0]));
  seed = hash_combine(seed, static_cast<std::uint64_t>(cells[1]));
  Rng rng(seed);

  const long lo = cfg.n_pop / 20, hi = cfg.n_pop / 10;
  const SiSeries& series = data.series[static_cast<std::size_t>(scenario)];
  return particle_filter_loglik<long>(
      cfg.n_particles, series.obs,
      [&](Rng& r) {
        return lo + static_cast<long>(r.uniform_int(static_cast<std::uint64_t>(hi - lo + 1)));
      },
      [&](long i, Rng& r) { return si_step(i, cfg.n_pop, beta, p_is, r); },
      [](long y, long i) { return log_poisson_pmf(y, static_cast<double>(i)); }, rng);
}

}  // namespace

Task make_disease_task(std::shared_ptr<const DiseaseData> data,
                       std::shared_ptr<DiseaseMemo> memo) {
  if (!memo) memo = std::make_shared<DiseaseMemo>();
  const DiseaseConfig& cfg = data->cfg;
  // Per-chain cost scope: the first query of a (scenario, cell) pair by this
  // chain is charged even when the shared memo already holds the value.
  auto seen = std::make_shared<std::unordered_set<std::uint64_t>>();

  auto loglik = [data, memo, seen](int scenario, const State& theta) -> ScenarioEval {
    const DiseaseConfig& c = data->cfg;
    auto cells = lattice_coords(theta, c.resolution);
    std::uint64_t cell_key = hash_combine(hash_label(kFnvOffset, "disease-cell"), c.seed);
    for (Eigen::Index d = 0; d < cells.size(); ++d) {
      cell_key = hash_combine(cell_key, static_cast<std::uint64_t>(cells[d]));
    }
    std::uint64_t pair_key = hash_combine(cell_key, static_cast<std::uint64_t>(scenario));
    ScenarioEval out;
    out.charge = seen->insert(pair_key).second;
    out.loglik = memo->get_or_compute(cell_key, scenario, c.n_scenarios, [&] {
      return disease_pf_loglik(*data, scenario, cells);
    });
    return out;
  };

  Task task;
  task.name = "disease2d";
  task.resolution = cfg.resolution;
  task.true_state = State(2);
  task.true_state << encode_rate(cfg.beta), encode_rate(cfg.gamma);
  task.target = make_target(cfg.n_scenarios, 2, cfg.sigma0, std::move(loglik));
  return task;
}

Task make_disease_task(const DiseaseConfig& cfg) {
  return make_disease_task(std::make_shared<const DiseaseData>(generate_disease_data(cfg)));
}

SyntheticConfig normalize(SyntheticConfig cfg) {
  if (cfg.variant == SyntheticVariant::Tall) {
    if (cfg.n_pop == 0.0) cfg.n_pop = 1e5;
    if (cfg.batch == 0) cfg.batch = 250;
    if (cfg.n_reps == 0) cfg.n_reps = 4;
    if (cfg.z_scale == 0.0) cfg.z_scale = 1e-4;
  } else {
    if (cfg.n_pop == 0.0) cfg.n_pop = 1250.0 * cfg.dim;
    if (cfg.batch == 0) cfg.batch = 1;
    if (cfg.n_reps == 0) cfg.n_reps = 16;
    if (cfg.z_scale == 0.0) cfg.z_scale = 1.0;
  }
  if (cfg.variant == SyntheticVariant::Correlated && cfg.zeta == 0.0) cfg.zeta = 0.45;
  if (cfg.variant == SyntheticVariant::Extreme) {
    if (cfg.zeta == 0.0) cfg.zeta = 0.485;
    if (cfg.prior_var == 0.0) cfg.prior_var = cfg.batch > 1 ? 9.0 : 25.0;
  }
  return cfg;
}

double rep_phase(std::uint64_t seed, int rep, double resolution) {
  std::uint64_t h = hash_combine(hash_label(kFnvOffset, "rep-phase"), seed);
  h = hash_combine(h, static_cast<std::uint64_t>(rep));
  std::uint64_t x = h;
  return resolution * (static_cast<double>(splitmix64(x) >> 11) * 0x1.0p-53);
}

SyntheticData generate_synthetic_data(const SyntheticConfig& raw) {
  SyntheticConfig cfg = normalize(raw);
  SyntheticData data;
  data.cfg = cfg;
  const int d = cfg.dim, n = cfg.n_scenarios;
  Rng rng = Rng(cfg.seed).derive("synthetic-data");

  data.weights = Eigen::MatrixXd::Zero(n, d);
  for (int i = 0; i < n; ++i) {
    if (d == 1) {
      data.weights(i, 0) = 1.0;
      continue;
    }
    int j = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(d)));
    double u = rng.uniform01();
    data.weights(i, j) += u;
    data.weights(i, (j + 1) % d) += 1.0 - u;
  }
  if (cfg.zeta > 0.0 && d > 1) {
    // Mix each dimension's weight with its predecessor in proportions
    // (1 - zeta, zeta); preserves non-negativity and row sums.
    Eigen::MatrixXd mixed = Eigen::MatrixXd::Zero(n, d);
    for (int k = 0; k < d; ++k) {
      mixed.col(k) = (1.0 - cfg.zeta) * data.weights.col(k) +
                     cfg.zeta * data.weights.col((k - 1 + d) % d);
    }
    data.weights = mixed;
  }

  // Observations from the true state theta = 0 with the exact (unquantized)
  // means; these are one-off draws, not part of the likelihood machinery.
  const State theta_true = State::Zero(d);
  for (int i = 0; i < n; ++i) {
    double mu = 0.0;
    for (int k = 0; k < d; ++k) mu += sigmoid(theta_true[k]) * data.weights(i, k);
    mu *= cfg.n_pop;
    std::vector<long> ys;
    for (int b = 0; b < cfg.batch; ++b) {
      long z = rng.poisson(cfg.z_scale * mu);
      ys.push_back(rng.poisson(static_cast<double>(z)));
    }
    data.obs.push_back(std::move(ys));
  }
  return data;
}

namespace {

// Quantized scenario mean for repetition `rep`: sigma(theta) evaluated at the
// centre of the repetition's grid cell in softplus space. sigma(theta) =
// 1 - exp(-softplus(theta)), so the cell centre maps back directly.
double quantized_mu(const SyntheticData& data, int scenario, const State& theta, int rep,
                    Eigen::Array<std::int64_t, Eigen::Dynamic, 1>& cells_out) {
  const SyntheticConfig& cfg = data.cfg;
  const double phase = rep_phase(cfg.seed, rep, cfg.resolution);
  double mu = 0.0;
  for (int k = 0; k < cfg.dim; ++k) {
    double s = softplus(theta[k]);
    auto cell = static_cast<std::int64_t>(std::floor((s + phase) / cfg.resolution));
    cells_out[k] = cell;
    double s_q = (static_cast<double>(cell) + 0.5) * cfg.resolution - phase;
    double sig_q = std::max(0.0, -std::expm1(-std::max(0.0, s_q)));
    mu += sig_q * data.weights(scenario, k);
  }
  return cfg.n_pop * mu;
}

double synthetic_loglik(const SyntheticData& data, int scenario, const State& theta) {
  const SyntheticConfig& cfg = data.cfg;
  const auto& ys = data.obs[static_cast<std::size_t>(scenario)];

  if (cfg.variant == SyntheticVariant::Smooth) {
    double mu = 0.0;
    for (int k = 0; k < cfg.dim; ++k) mu += sigmoid(theta[k]) * data.weights(scenario, k);
    mu *= cfg.n_pop * cfg.z_scale;
    double total = 0.0;
    for (long y : ys) total += log_poisson_pmf(y, mu);
    return total;
  }

  // Draw the latent occupancy once per (scenario, batch item, repetition)
  // with a seed fixed by the repetition's grid cell, then average the
  // likelihood over repetitions.
  std::vector<double> mu_q(static_cast<std::size_t>(cfg.n_reps));
  std::vector<std::uint64_t> rep_seed(static_cast<std::size_t>(cfg.n_reps));
  Eigen::Array<std::int64_t, Eigen::Dynamic, 1> cells(cfg.dim);
  for (int r = 0; r < cfg.n_reps; ++r) {
    mu_q[static_cast<std::size_t>(r)] = quantized_mu(data, scenario, theta, r, cells);
    std::uint64_t h = hash_combine(hash_label(kFnvOffset, "synthetic-z"), cfg.seed);
    h = hash_combine(h, static_cast<std::uint64_t>(scenario));
    h = hash_combine(h, static_cast<std::uint64_t>(r));
    for (int k = 0; k < cfg.dim; ++k) h = hash_combine(h, static_cast<std::uint64_t>(cells[k]));
    rep_seed[static_cast<std::size_t>(r)] = h;
  }

  double total = 0.0;
  for (std::size_t b = 0; b < ys.size(); ++b) {
    double acc = kNegInf;
    for (int r = 0; r < cfg.n_reps; ++r) {
      Rng zrng(hash_combine(rep_seed[static_cast<std::size_t>(r)], b));
      long z = zrng.poisson(cfg.z_scale * mu_q[static_cast<std::size_t>(r)]);
      acc = log_add(acc, log_poisson_pmf(ys[b], static_cast<double>(z)));
    }
    total += acc - std::log(static_cast<double>(cfg.n_reps));
  }
  return total;
}

}  // namespace

Task make_synthetic_task(std::shared_ptr<const SyntheticData> data) {
  const SyntheticConfig& cfg = data->cfg;
  auto loglik = [data](int scenario, const State& theta) -> ScenarioEval {
    return ScenarioEval{synthetic_loglik(*data, scenario, theta), true};
  };
  std::function<double(const State&)> prior;
  if (cfg.prior_var > 0.0) {
    double var = cfg.prior_var;
    prior = [var](const State& theta) { return -theta.squaredNorm() / (2.0 * var); };
  }

  Task task;
  switch (cfg.variant) {
    case SyntheticVariant::Standard: task.name = "synthetic"; break;
    case SyntheticVariant::Smooth: task.name = "synthetic-smooth"; break;
    case SyntheticVariant::Correlated: task.name = "synthetic-correlated"; break;
    case SyntheticVariant::Extreme: task.name = "synthetic-extreme"; break;
    case SyntheticVariant::Tall: task.name = "synthetic-tall"; break;
  }
  task.resolution = cfg.resolution;
  task.true_state = State::Zero(cfg.dim);
  task.target = make_target(cfg.n_scenarios, cfg.dim, cfg.sigma0, std::move(loglik),
                            std::move(prior));
  return task;
}

Task make_synthetic_task(const SyntheticConfig& cfg) {
  return make_synthetic_task(std::make_shared<const SyntheticData>(generate_synthetic_data(cfg)));
}

Task make_motivating_task(const MotivatingConfig& mcfg) {
  // The 1-D illustration: z_i ~ Poisson(1e5 * sigmoid(theta)), observed
  // y_i ~ Poisson(z_i / 100), a single realisation per likelihood.
  constexpr double kLatentScale = 1e5;
  Rng rng = Rng(mcfg.seed).derive("motivating-data");
  auto obs = std::make_shared<std::vector<long>>();
  for (int i = 0; i < mcfg.n_scenarios; ++i) {
    long z = rng.poisson(kLatentScale * sigmoid(mcfg.theta_true));
    obs->push_back(rng.poisson(static_cast<double>(z) / 100.0));
  }

  auto cfg = std::make_shared<const MotivatingConfig>(mcfg);
  auto loglik = [obs, cfg](int scenario, const State& theta) -> ScenarioEval {
    const double phase = rep_phase(cfg->seed, 0, cfg->resolution);
    double s = softplus(theta[0]);
    auto cell = static_cast<std::int64_t>(std::floor((s + phase) / cfg->resolution));
    double s_q = (static_cast<double>(cell) + 0.5) * cfg->resolution - phase;
    double sig_q = std::max(0.0, -std::expm1(-std::max(0.0, s_q)));
    std::uint64_t h = hash_combine(hash_label(kFnvOffset, "motivating-z"), cfg->seed);
    h = hash_combine(h, static_cast<std::uint64_t>(scenario));
    h = hash_combine(h, static_cast<std::uint64_t>(cell));
    Rng zrng(h);
    long z = zrng.poisson(kLatentScale * sig_q);
    double ll = log_poisson_pmf((*obs)[static_cast<std::size_t>(scenario)],
                                static_cast<double>(z) / 100.0);
    return ScenarioEval{ll, true};
  };

  Task task;
  task.name = "motivating1d";
  task.resolution = mcfg.resolution;
  task.true_state = State::Constant(1, mcfg.theta_true);
  task.target = make_target(mcfg.n_scenarios, 1, mcfg.sigma0, std::move(loglik));
  return task;
}

Task make_gaussian_task(double mean, double sd, double sigma0) {
  auto loglik = [mean, sd](int, const State& theta) -> ScenarioEval {
    double z = (theta[0] - mean) / sd;
    return ScenarioEval{-0.5 * z * z, true};
  };
  Task task;
  task.name = "gauss1d";
  task.true_state = State::Constant(1, mean);
  task.target = make_target(1, 1, sigma0, std::move(loglik));
  return task;
}

}  // namespace subsetmc
