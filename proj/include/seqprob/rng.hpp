#pragma once

#include <cmath>
#include <cstdint>

namespace seqprob {

// Counter-based deterministic stream: output j of stream (seed, stream_id) is a
// pure function of (seed, stream_id, j), so ensembles are replayable and
// independent of evaluation order or thread count.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream_id = 0)
      : key_(mix(mix(0x9e3779b97f4a7c15ULL ^ seed) + stream_id)), counter_(0) {}

  std::uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  // uniform in [0,1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = 0.0;
    while (u1 == 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    cached_ = r * std::sin(6.283185307179586477 * u2);
    have_cached_ = true;
    return r * std::cos(6.283185307179586477 * u2);
  }

 private:
  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_;
  double cached_ = 0.0;
  bool have_cached_ = false;
};

}  // namespace seqprob
