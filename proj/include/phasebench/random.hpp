#pragma once

// Counter-based random numbers.
//
// Every random draw in the library comes from a CounterRng: the n-th output
// of a generator with key k is splitmix64_mix(k + (n + 1) * 0x9E3779B97F4A7C15).
// Keys are derived from a user seed plus a stream tag (and optional indices),
// so the atom sampler, the i2 tuner, the photon sampler and the solvers each
// consume an independent substream of one 64-bit seed. Distributions come
// from Boost.Random, whose algorithms are fixed in source, so outputs are
// bit-identical across platforms and standard libraries.

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <limits>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

namespace phasebench {

enum class Stream : std::uint64_t {
  atoms = 0x41544f4d53ULL,     // "ATOMS"
  weights = 0x5745494748ULL,   // "WEIGH"
  tuning = 0x54554e494eULL,    // "TUNIN"
  photons = 0x50484f544fULL,   // "PHOTO"
  solver = 0x534f4c5645ULL,    // "SOLVE"
  campaign = 0x43414d5041ULL,  // "CAMPA"
  gaussian = 0x4741555353ULL,  // "GAUSS"
  cdp = 0x434450ULL,           // "CDP"
};

constexpr std::uint64_t splitmix64_mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Key for (seed, stream, i0, i1, ...). Order of indices matters.
constexpr std::uint64_t derive_key(std::uint64_t seed, Stream stream,
                                   std::initializer_list<std::uint64_t> indices = {}) {
  std::uint64_t k = splitmix64_mix(seed ^ splitmix64_mix(static_cast<std::uint64_t>(stream)));
  for (std::uint64_t i : indices) k = splitmix64_mix(k ^ splitmix64_mix(i + 0x632BE59BD9B4E019ULL));
  return k;
}

class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t key) : key_(key) {}
  CounterRng(std::uint64_t seed, Stream stream, std::initializer_list<std::uint64_t> indices = {})
      : key_(derive_key(seed, stream, indices)) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    ++counter_;
    return splitmix64_mix(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

  // Uniform integer in [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return boost::random::uniform_int_distribution<std::int64_t>(lo, hi)(*this);
  }
  double uniform01() { return boost::random::uniform_real_distribution<double>(0.0, 1.0)(*this); }
  double normal() { return boost::random::normal_distribution<double>(0.0, 1.0)(*this); }
  // Complex normal with variance 1/2 in each of the real and imaginary parts.
  std::complex<double> complex_normal() {
    constexpr double s = 0.70710678118654752440;
    const double re = normal();
    const double im = normal();
    return {s * re, s * im};
  }
  std::int64_t poisson(double mean) {
    if (!(mean > 0.0)) return 0;
    return boost::random::poisson_distribution<std::int64_t, double>(mean)(*this);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace phasebench
