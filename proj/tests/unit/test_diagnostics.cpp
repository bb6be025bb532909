#include <doctest.h>

#include "nlwave/diagnostics.hpp"
#include "nlwave/errors.hpp"
#include "nlwave/random.hpp"
#include "nlwave/steady_state.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace nlwave;

namespace {

Model make(int N, DampingLaw law, Nonlinearity nl) {
  return Model::make(SpectralDomain::build(1, N), law, nl);
}

}  // namespace

TEST_CASE("energy values") {
  const Model m = make(4, DampingLaw::shifted_power(0.1, 2), Nonlinearity::odd_power(5));
  const auto& d = m.domain;
  CHECK(energy(zero_state(d), m).E_u == 0.0);
  CHECK(energy(ModalState{d.zero_field(), d.basis(1), 0.0}, m).E_u == doctest::Approx(1.0).epsilon(1e-15));

  const double c = std::sqrt(2.0 / oracle::pi);
  const double integral =
      oracle::quadrature([&](double x) { return std::pow(c * std::sin(x), 6) / 6.0; }, 0.0, oracle::pi, 1000000);
  const auto e = energy(ModalState{d.basis(1), d.zero_field(), 0.0}, m);
  CHECK(e.E_u == doctest::Approx(1.0 + 2.0 * integral).epsilon(1e-10));
  CHECK(e.Phi == e.E_u);

  const Model forced = Model::make(d, m.damping, m.nonlinearity, Field(d.basis(2) * 0.5));
  const auto f = energy(ModalState{d.basis(2), d.zero_field(), 0.0}, forced);
  CHECK(f.forcing_term == doctest::Approx(1.0));
}

TEST_CASE("identity residual and Lyapunov functional") {
  const Model m = make(8, DampingLaw::hyperbolic(1, 2), Nonlinearity::bistable(5, 2.0));
  IntegratorConfig cfg;
  cfg.dt = 1e-2;
  const auto zero = integrate(zero_state(m.domain), m, cfg, 1.0);
  CHECK(energy_identity_residual(zero) == 0.0);

  const auto eq = find_equilibria(m);
  REQUIRE(eq.members.size() >= 3);
  const auto at_eq = integrate(ModalState{eq.members.back().u_star, m.domain.zero_field(), 0.0}, m, cfg, 2.0);
  const auto lt_eq = lyapunov_trace(at_eq);
  for (double p : lt_eq.phi) CHECK(std::abs(p - lt_eq.phi.front()) <= 1e-10);

  SplitMix64 rng(12);
  const ModalState s0 = random_state(m.domain, rng, 2.0, 1.0, 4);
  const auto tr = integrate(s0, m, cfg, 5.0, 5);
  const auto lt = lyapunov_trace(tr);
  CHECK(lt.non_increasing);
  CHECK(lt.balance_ok);
  CHECK(lt.strictly_decreasing);
  for (std::size_t i = 1; i < lt.dissipation.size(); ++i) CHECK(lt.dissipation[i] >= lt.dissipation[i - 1]);

  IntegratorConfig lin = cfg;
  lin.linear_test_mode = true;
  const auto cons = lyapunov_trace(integrate(s0, m, lin, 5.0, 5));
  CHECK(cons.non_increasing);
  CHECK_FALSE(cons.strictly_decreasing);
  CHECK(cons.max_balance_error <= 1e-12);
}

TEST_CASE("dissipation integral of a damped mode") {
  const Model m = make(4, DampingLaw::constant(1), Nonlinearity::odd_power(5));
  IntegratorConfig cfg;
  cfg.dt = 1e-4;
  cfg.linear_test_mode = true;
  cfg.linear_damping = 1.0;
  const auto tr = integrate(ModalState{m.domain.basis(1), m.domain.zero_field(), 0.0}, m, cfg, 1.0);
  for (double p : {0.0, 1.0}) {
    const auto di = dissipation_integral(tr, p);
    const double ref = oracle::quadrature(
        [&](double t) { return std::pow(std::abs(oracle::damped_mode_velocity(1.0, 1.0, 1.0, 0.0, t)), 2 * p + 2); },
        0.0, 1.0, 20000);
    CHECK(di.back() == doctest::Approx(ref).epsilon(1e-6));
  }
  const auto still = integrate(ModalState{m.domain.zero_field(), m.domain.zero_field(), 0.0}, m, cfg, 0.01);
  CHECK(dissipation_integral(still, 1.0).back() == 0.0);
  CHECK_THROWS_AS(dissipation_integral(tr, -1.0), InvalidArgument);
}

TEST_CASE("norms") {
  const auto d = SpectralDomain::build(1, 4);
  CHECK(negative_norm_velocity(d, ModalState{d.zero_field(), d.basis(2), 0.0}) == doctest::Approx(0.5));
  CHECK(negative_norm_velocity(d, zero_state(d)) == 0.0);
  CHECK(negative_norm_velocity(d, ModalState{d.zero_field(), d.basis(4), 0.0}, 0.5) == doctest::Approx(0.5));
  CHECK_THROWS_AS(negative_norm_velocity(d, zero_state(d), 0.0), InvalidArgument);

  CHECK(e1_norm(d, ModalState{d.basis(1), d.zero_field(), 0.0}) == doctest::Approx(1.0));
  CHECK(e1_norm(d, ModalState{d.basis(2), d.zero_field(), 0.0}) == doctest::Approx(4.0));
  CHECK(e1_norm(d, ModalState{d.zero_field(), d.basis(2), 0.0}) == doctest::Approx(2.0));

  CHECK(l12_norm(d, d.zero_field()) == 0.0);
  const double c = std::sqrt(2.0 / oracle::pi);
  const double ref = std::pow(
      oracle::quadrature([&](double x) { return std::pow(c * std::sin(x), 12); }, 0.0, oracle::pi, 1000000), 1.0 / 12);
  CHECK(l12_norm(d, d.basis(1)) == doctest::Approx(ref).epsilon(1e-10));
}

TEST_CASE("Strichartz window of a static state") {
  const Model m = make(4, DampingLaw::constant(1), Nonlinearity::odd_power(5));
  const auto& d = m.domain;
  Trajectory tr{m, IntegratorConfig{}, 0.5, {}, {}, {}, {}, {}};
  for (int i = 0; i <= 4; ++i) {
    tr.states.push_back(ModalState{d.basis(1), d.zero_field(), 0.5 * i});
    tr.sample_steps.push_back(static_cast<std::size_t>(i));
    tr.cumulative_dissipation.push_back(0.0);
  }
  CHECK(strichartz_norm(tr, 0.3, 1.3) == doctest::Approx(l12_norm(d, d.basis(1))).epsilon(1e-12));
  CHECK(strichartz_norm(tr, 0.0, 2.0) == doctest::Approx(std::pow(2.0, 0.25) * l12_norm(d, d.basis(1))));
  CHECK_THROWS_AS(strichartz_norm(tr, 1.0, 3.0), InvalidArgument);
  CHECK_THROWS_AS(strichartz_norm(tr, 1.0, 0.5), InvalidArgument);

  Trajectory zero{m, IntegratorConfig{}, 1.0, {zero_state(d), ModalState{d.zero_field(), d.zero_field(), 1.0}},
                  {0, 1}, {0.0, 0.0}, {}, {}};
  CHECK(strichartz_norm(zero, 0.0, 1.0) == 0.0);
}

TEST_CASE("perturbed energy") {
  const Model m = make(4, DampingLaw::hyperbolic(1, 2), Nonlinearity::odd_power(5));
  const auto& d = m.domain;
  SplitMix64 rng(3);
  const ModalState s = random_state(d, rng, 1.0, 1.0, 0);
  const auto r0 = perturbed_energy(s, m, 0.0);
  CHECK(r0.E_rho == doctest::Approx(energy(s, m).E_u).epsilon(1e-15));
  CHECK(r0.Q == doctest::Approx(2.0 * m.damping.J(s.v.squaredNorm()) * s.v.squaredNorm()));
  CHECK(r0.G == 0.0);

  const ModalState e{d.basis(1), d.basis(1), 0.0};
  const auto r = perturbed_energy(e, m, 0.1);
  CHECK(r.E_rho - r.E_u == doctest::Approx(0.1));
  CHECK_THROWS_AS(perturbed_energy(e, m, 1.5), InvalidArgument);
  CHECK_THROWS_AS(perturbed_energy(e, m, -0.1), InvalidArgument);
}

TEST_CASE("traces") {
  const Model m = make(8, DampingLaw::constant(1), Nonlinearity::bistable(5, 2.0));
  const auto eq = find_equilibria(m);
  IntegratorConfig cfg;
  cfg.dt = 1e-2;
  const auto tr = integrate(ModalState{eq.members.back().u_star, m.domain.zero_field(), 0.0}, m, cfg, 1.0, 10);
  const auto e1 = e1_norm_trace(tr);
  REQUIRE(e1.values.size() == tr.states.size());
  for (double x : e1.values) CHECK(x == doctest::Approx(e1.values.front()).epsilon(1e-10));
  for (double x : velocity_negative_norm_trace(tr).values) CHECK(x <= 1e-10);
  CHECK(energy_norm_trace(tr).times.back() == doctest::Approx(1.0));
}
