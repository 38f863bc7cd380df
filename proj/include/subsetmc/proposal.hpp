// Proposal kernels. The samplers only require a symmetric primitive kernel
// with a scalar scale multiplier; the Gaussian random walk is the default and
// a discrete neighbour kernel supports enumerable test targets.
#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "subsetmc/state.hpp"

namespace subsetmc {

class Proposal {
 public:
  virtual ~Proposal() = default;
  // Draws theta' given theta at scale multiplier r. Must be symmetric:
  // q(theta|theta') == q(theta'|theta).
  virtual State propose(const State& theta, double r, Rng& rng) const = 0;
};

// theta' = theta + (r * sigma0) * z with z standard Normal, Eq-style
// N(theta, (r sigma0)^2 I_D). Symmetric, so the asymmetry ratio is 1.
class RandomWalkProposal : public Proposal {
 public:
  RandomWalkProposal(double sigma0, int dim) : sigma0_(sigma0), dim_(dim) {}

  State propose(const State& theta, double r, Rng& rng) const override {
    State out(theta.size());
    const double s = r * sigma0_;
    for (Eigen::Index i = 0; i < theta.size(); ++i) out[i] = theta[i] + s * rng.normal();
    return out;
  }

  double sigma0() const { return sigma0_; }
  int dim() const { return dim_; }

 private:
  double sigma0_;
  int dim_;
};

// Uniform draw over the other sites of a finite state set. Symmetric.
class DiscreteNeighbourProposal : public Proposal {
 public:
  explicit DiscreteNeighbourProposal(std::vector<State> sites) : sites_(std::move(sites)) {}

  State propose(const State& theta, double /*r*/, Rng& rng) const override {
    int cur = -1;
    for (std::size_t i = 0; i < sites_.size(); ++i) {
      if (sites_[i] == theta) {
        cur = static_cast<int>(i);
        break;
      }
    }
    auto idx = static_cast<int>(rng.uniform_int(sites_.size() - (cur >= 0 ? 1 : 0)));
    if (cur >= 0 && idx >= cur) ++idx;
    return sites_[static_cast<std::size_t>(idx)];
  }

 private:
  std::vector<State> sites_;
};

// The controller's action set: K proposal scale multipliers, default 11
// values equally spaced on a log scale over [0.1, 10].
struct ActionSet {
  std::vector<double> multipliers;

  static ActionSet log_spaced(int k = 11, double lo = 0.1, double hi = 10.0) {
    ActionSet a;
    a.multipliers.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
      double f = k == 1 ? 0.0 : static_cast<double>(i) / (k - 1);
      a.multipliers[static_cast<std::size_t>(i)] = lo * std::pow(hi / lo, f);
    }
    return a;
  }

  int size() const { return static_cast<int>(multipliers.size()); }
};

}  // namespace subsetmc
