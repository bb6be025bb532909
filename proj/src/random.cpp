#include "nlwave/random.hpp"

#include "nlwave/errors.hpp"

#include <cmath>
#include <numbers>

namespace nlwave {

std::uint64_t SplitMix64::next() {
  state_ += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double SplitMix64::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Field random_smooth_field(const SpectralDomain& domain, SplitMix64& rng, double decay,
                          double amplitude, int band) {
  Field f = domain.zero_field();
  const auto& lam = domain.eigenvalues();
  for (std::size_t i = 0; i < domain.num_modes(); ++i) {
    if (band > 0 && domain.max_axis_index(i) > band) continue;
    const auto k = static_cast<Eigen::Index>(i);
    f[k] = amplitude * std::pow(lam[k], -decay) * rng.normal();
  }
  return f;
}

ModalState random_state(const SpectralDomain& domain, SplitMix64& rng, double norm, double decay,
                        int band) {
  if (!(norm >= 0.0)) throw InvalidArgument("random_state requires a non-negative norm");
  ModalState s{random_smooth_field(domain, rng, decay, 1.0, band),
               random_smooth_field(domain, rng, decay, 1.0, band), 0.0};
  const double n = energy_norm(domain, s);
  if (n > 0.0) {
    s.u *= norm / n;
    s.v *= norm / n;
  }
  return s;
}

}  // namespace nlwave
