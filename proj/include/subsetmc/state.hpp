// Chain states are plain Eigen vectors in the unbounded (encoded) space.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <cstring>

#include "subsetmc/rng.hpp"

namespace subsetmc {

using State = Eigen::VectorXd;

inline bool is_finite(const State& s) { return s.allFinite(); }

// Bit-exact hash of a state, for caches keyed on the state actually proposed.
inline std::uint64_t exact_state_hash(const State& s) {
  std::uint64_t h = kFnvOffset;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    std::uint64_t bits;
    double v = s[i];
    std::memcpy(&bits, &v, sizeof(bits));
    h = hash_combine(h, bits);
  }
  return h;
}

// Key of the grid cell containing `transformed` at the given resolution and
// phase offset. Integer lattice coordinates avoid float-equality fragility;
// `salt` distinguishes repetitions (each with its own phase) and scenarios.
inline std::uint64_t state_key(const Eigen::VectorXd& transformed, double resolution,
                               double phase = 0.0, std::uint64_t salt = 0) {
  std::uint64_t h = hash_combine(kFnvOffset, salt);
  for (Eigen::Index i = 0; i < transformed.size(); ++i) {
    auto cell = static_cast<std::int64_t>(std::floor((transformed[i] + phase) / resolution));
    h = hash_combine(h, static_cast<std::uint64_t>(cell));
  }
  return h;
}

inline Eigen::Array<std::int64_t, Eigen::Dynamic, 1> lattice_coords(
    const Eigen::VectorXd& transformed, double resolution, double phase = 0.0) {
  Eigen::Array<std::int64_t, Eigen::Dynamic, 1> cells(transformed.size());
  for (Eigen::Index i = 0; i < transformed.size(); ++i) {
    cells[i] = static_cast<std::int64_t>(std::floor((transformed[i] + phase) / resolution));
  }
  return cells;
}

}  // namespace subsetmc
