#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace tpsh {

// splitmix64 step; used to derive independent seed streams from a master
// seed. Stateless and documented so runs are reproducible across platforms.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seed-splitting rule for sweep points and sub-streams: mix the master seed
// with up to two stream indices. derive_seed(s, a, b) is the seed of
// sub-stream (a, b) of master s.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b = 0) {
  return splitmix64(splitmix64(master ^ (a * 0x9e3779b97f4a7c15ULL)) ^
                    (b * 0xc2b2ae3d27d4eb4fULL));
}

// Deterministic distribution helpers on top of std::mt19937_64. The standard
// fully specifies the generator; the distributions below are written out so
// the sampled values do not depend on the standard library implementation.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  // Uniform in [0, 1): 53-bit mantissa construction.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller (pairs cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Poisson: inversion by sequential search for small means, otherwise the
  // transformed-rejection method is overkill here so we fall back to
  // splitting the mean (counts stay exact and deterministic).
  long poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean > 30.0) {
      const long half = poisson(mean / 2.0);
      return half + poisson(mean - mean / 2.0);
    }
    const double limit = std::exp(-mean);
    long k = 0;
    double prod = uniform();
    while (prod > limit) {
      ++k;
      prod *= uniform();
    }
    return k;
  }

  // Index in [0, n) from the discrete distribution given by cumulative
  // weights (last entry = total mass).
  int sample_cdf(const std::vector<double>& cdf) {
    const double u = uniform() * cdf.back();
    auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    int idx = static_cast<int>(it - cdf.begin());
    if (idx >= static_cast<int>(cdf.size())) idx = static_cast<int>(cdf.size()) - 1;
    return idx;
  }

private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace tpsh
