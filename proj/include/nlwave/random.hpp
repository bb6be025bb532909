#pragma once

#include "nlwave/spectral.hpp"

#include <cstdint>

namespace nlwave {

/**
 * SplitMix64 counter generator.
 *
 * Stream `s` of seed `x` starts from state x + s * 0xD1B54A32D192ED03.  Each draw
 * adds 0x9E3779B97F4A7C15 to the state and returns
 *   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
 *   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
 *   z ^ (z >> 31).
 * Uniforms are (draw >> 11) * 2^-53 in [0, 1); a standard normal consumes two
 * uniforms u1, u2 and returns sqrt(-2 ln(1 - u1)) cos(2 pi u2).
 */
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed, std::uint64_t stream = 0)
      : state_(seed + stream * 0xD1B54A32D192ED03ULL) {}

  std::uint64_t next();
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();

 private:
  std::uint64_t state_;
};

/// c_k = amplitude * lambda_k^{-decay} * N(0,1) on modes whose axis indices are
/// all <= band (band <= 0 means every mode), drawn in modal order.
Field random_smooth_field(const SpectralDomain& domain, SplitMix64& rng, double decay,
                          double amplitude = 1.0, int band = 0);

/// Random state (u, v) with energy norm exactly `norm`, both components drawn
/// from random_smooth_field with the given decay and band.
ModalState random_state(const SpectralDomain& domain, SplitMix64& rng, double norm, double decay,
                        int band);

}  // namespace nlwave
