#include "subsetmc/rng.hpp"

#include "subsetmc/special.hpp"

namespace subsetmc {

long Rng::poisson(double mu) {
  if (mu <= 0.0) return 0;
  if (mu < 10.0) {
    // Multiplicative inversion.
    double limit = std::exp(-mu);
    double prod = uniform01();
    long k = 0;
    while (prod > limit) {
      prod *= uniform01();
      ++k;
    }
    return k;
  }
  // PTRS transformed rejection (Hormann 1993).
  const double loglam = std::log(mu);
  const double b = 0.931 + 2.53 * std::sqrt(mu);
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    double u = uniform01() - 0.5;
    double v = uniform01();
    double us = 0.5 - std::fabs(u);
    double kd = std::floor((2.0 * a / us + b) * u + mu + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<long>(kd);
    if (kd < 0.0 || (us < 0.013 && v > us)) continue;
    long k = static_cast<long>(kd);
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -mu + kd * loglam - log_factorial(k)) {
      return k;
    }
  }
}

namespace {

// Inversion via the CDF recurrence; expected O(n*p) iterations.
long binomial_inversion(Rng& rng, long n, double p) {
  const double q = 1.0 - p;
  const double s = p / q;
  double f = std::exp(static_cast<double>(n) * std::log(q));  // pmf(0)
  double u = rng.uniform01();
  long k = 0;
  for (;;) {
    if (u < f) return k;
    u -= f;
    ++k;
    if (k > n) return n;  // numerical guard
    f *= s * static_cast<double>(n - k + 1) / static_cast<double>(k);
  }
}

// BTRS transformed rejection (Hormann 1993), valid for n*p >= 10, p <= 0.5.
long binomial_btrs(Rng& rng, long n, double p) {
  const double nd = static_cast<double>(n);
  const double spq = std::sqrt(nd * p * (1.0 - p));
  const double b = 1.15 + 2.53 * spq;
  const double a = -0.0873 + 0.0248 * b + 0.01 * p;
  const double c = nd * p + 0.5;
  const double v_r = 0.92 - 4.2 / b;
  const double urvr = 0.86 * v_r;
  const double alpha = (2.83 + 5.1 / b) * spq;
  const double lpq = std::log(p / (1.0 - p));
  const long m = static_cast<long>(std::floor((nd + 1.0) * p));
  const double h = log_factorial(m) + log_factorial(n - m);
  for (;;) {
    double v = rng.uniform01();
    double u;
    if (v <= urvr) {
      u = v / v_r - 0.43;
      return static_cast<long>(std::floor((2.0 * a / (0.5 - std::fabs(u)) + b) * u + c));
    }
    if (v >= v_r) {
      u = rng.uniform01() - 0.5;
    } else {
      u = v / v_r - 0.93;
      u = (u < 0 ? -0.5 : 0.5) - u;
      v = rng.uniform01() * v_r;
    }
    double us = 0.5 - std::fabs(u);
    long k = static_cast<long>(std::floor((2.0 * a / us + b) * u + c));
    if (k < 0 || k > n) continue;
    v = std::log(v * alpha / (a / (us * us) + b));
    if (v <= h - log_factorial(k) - log_factorial(n - k) +
                 static_cast<double>(k - m) * lpq) {
      return k;
    }
  }
}

}  // namespace

long Rng::binomial(long n, double p) {
  if (n <= 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  if (p > 0.5) return n - binomial(n, 1.0 - p);
  if (static_cast<double>(n) * p < 10.0) return binomial_inversion(*this, n, p);
  return binomial_btrs(*this, n, p);
}

}  // namespace subsetmc
