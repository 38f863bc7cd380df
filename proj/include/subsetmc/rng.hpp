// Deterministic random number generation. The standard library distributions
// are implementation-defined, so every transform used by the samplers and
// tasks is implemented here to keep runs bit-reproducible across platforms.
#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace subsetmc {

inline std::uint64_t splitmix64(std::uint64_t& x) {
  x += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// FNV-1a, used for seed derivation and state keys.
inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  constexpr std::uint64_t prime = 0x100000001b3ULL;
  for (int i = 0; i < 8; ++i) {
    h = (h ^ ((v >> (8 * i)) & 0xff)) * prime;
  }
  return h;
}

inline std::uint64_t hash_label(std::uint64_t h, std::string_view s) {
  constexpr std::uint64_t prime = 0x100000001b3ULL;
  for (unsigned char c : s) h = (h ^ c) * prime;
  return h;
}

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;

// xoshiro256++ with splitmix64 seeding.
class Rng {
 public:
  Rng() : Rng(0) {}
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t uniform_int(std::uint64_t n) {
    // Lemire's multiply-shift with rejection for exact uniformity.
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * n;
    std::uint64_t l = static_cast<std::uint64_t>(m);
    if (l < n) {
      std::uint64_t t = (0 - n) % n;
      while (l < t) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * n;
        l = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform01();  // (0, 1]
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Poisson draw: multiplicative inversion for small means, PTRS
  // (Hormann's transformed rejection) otherwise.
  long poisson(double mu);

  // Binomial draw: CDF inversion for small n*p, BTRS otherwise.
  long binomial(long n, double p);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Independent child stream; labels keep streams for distinct purposes
  // provably disjoint under the hash.
  Rng derive(std::string_view label, std::uint64_t a = 0, std::uint64_t b = 0) const {
    std::uint64_t h = kFnvOffset;
    for (auto w : s_) h = hash_combine(h, w);
    h = hash_label(h, label);
    h = hash_combine(h, a);
    h = hash_combine(h, b);
    return Rng(h);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace subsetmc
