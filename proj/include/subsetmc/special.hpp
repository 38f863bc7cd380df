// Small special-function kit: log-factorials, Poisson log-pmf, regularized
// incomplete beta and the Student-t two-tailed probability built on it.
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace subsetmc {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(n!) via a process-wide table; falls back to lgamma beyond the table.
double log_factorial(long n);

// log Poisson pmf at count y with mean lambda >= 0.
inline double log_poisson_pmf(long y, double lambda) {
  if (lambda <= 0.0) return y == 0 ? 0.0 : kNegInf;
  return -lambda + static_cast<double>(y) * std::log(lambda) - log_factorial(y);
}

inline double log_sigmoid(double x) {
  // log(1/(1+e^-x)) = -softplus(-x)
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

inline double sigmoid(double x) {
  return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

inline double softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

// Regularized incomplete beta I_x(a, b), continued fraction (Lentz), accurate
// to ~1e-12.
double incomplete_beta(double a, double b, double x);

// Two-tailed Student-t tail probability P(|T| > t) with nu degrees of freedom.
double student_t_two_tail(double t, double nu);

// log(exp(a) + exp(b)) with -inf handled.
inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double m = a > b ? a : b;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// log(exp(a) - exp(b)) for a > b; -inf when the difference underflows to <= 0.
inline double log_sub(double a, double b) {
  if (b == kNegInf) return a;
  if (a <= b) return kNegInf;
  return a + std::log1p(-std::exp(b - a));
}

}  // namespace subsetmc
