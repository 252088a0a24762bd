#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace covdist {

// Deterministic random stream addressed by (master_seed, substream).
//
// Every Monte Carlo trial owns its own substream, derived from the master
// seed and the trial index through a splitmix64 mix, so results are
// bit-identical no matter how trials are scheduled across threads.  The
// uniform mapping is fixed to (x >> 11) * 2^-53 and normals come from
// Box-Muller; none of the distribution adapters in <random> are used, since
// their output is implementation-defined and would break cross-platform
// reproducibility of stored fixtures.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t substream);

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal, Box-Muller pair with one value cached.
  double normal();

  // Circularly-symmetric complex normal with E|x|^2 = 1.
  std::complex<double> normal_complex() {
    const double re = normal();
    const double im = normal();
    return {re * 0.70710678118654752440, im * 0.70710678118654752440};
  }

 private:
  std::mt19937_64 gen_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace covdist
