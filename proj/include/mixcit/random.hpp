#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace mixcit {

// splitmix64 finalizer; used to derive independent seeds from stream ids.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t s = mix64(base ^ 0x8f1bbcdcbfa53e0bULL);
  s = mix64(s ^ a);
  s = mix64(s ^ b);
  s = mix64(s ^ c);
  return s;
}

// mt19937_64 with hand-rolled variate transforms. The engine's output
// sequence is pinned by the standard; the std::*_distribution algorithms
// are not, so rolling our own keeps seeded runs portable across stdlibs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // [0, 1)
  double uniform() { return (engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // unbiased integer in [0, m), m >= 1
  std::uint64_t below(std::uint64_t m) {
    const std::uint64_t rem = std::numeric_limits<std::uint64_t>::max() % m;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - rem;
    std::uint64_t v = engine_();
    while (v >= limit) v = engine_();
    return v % m;
  }

  // Box-Muller; consumes two uniforms per draw.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  double exponential(double mean) { return -mean * std::log1p(-uniform()); }

  int bernoulli(double p) { return uniform() < p ? 1 : 0; }

  int binomial(int trials, double p) {
    int s = 0;
    for (int t = 0; t < trials; ++t) s += bernoulli(p);
    return s;
  }

  // Knuth multiplication method; adequate for the lambdas the models use.
  int poisson(double lambda) {
    const double limit = std::exp(-lambda);
    double prod = uniform();
    int k = 0;
    while (prod > limit) {
      prod *= uniform();
      ++k;
    }
    return k;
  }

  // category a in {0..weights.size()-1} with probability weights[a]/sum
  int categorical(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform() * total;
    for (std::size_t a = 0; a + 1 < weights.size(); ++a) {
      u -= weights[a];
      if (u < 0.0) return static_cast<int>(a);
    }
    return static_cast<int>(weights.size()) - 1;
  }

  // Fisher-Yates over {0..n-1}
  std::vector<std::size_t> permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    for (std::size_t i = n; i > 1; --i)
      std::swap(p[i - 1], p[below(i)]);
    return p;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mixcit
