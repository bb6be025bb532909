#include <doctest.h>

#include "nlwave/diagnostics.hpp"
#include "nlwave/errors.hpp"
#include "nlwave/integrator.hpp"
#include "nlwave/random.hpp"
#include "nlwave/steady_state.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace nlwave;

namespace {

Model quintic(int N, DampingLaw law = DampingLaw::shifted_power(0.1, 2)) {
  return Model::make(SpectralDomain::build(1, N), law, Nonlinearity::odd_power(5));
}

IntegratorConfig linear_cfg(double dt, double gamma = 0.0) {
  IntegratorConfig c;
  c.dt = dt;
  c.linear_test_mode = true;
  c.linear_damping = gamma;
  return c;
}

}  // namespace

TEST_CASE("one linear step reproduces cos(dt) to third order") {
  const Model m = quintic(4);
  const double dt = 1e-3;
  const auto r = step(ModalState{m.domain.basis(1), m.domain.zero_field(), 0.0}, m, linear_cfg(dt));
  CHECK(std::abs(r.state.u[0] - std::cos(dt)) <= dt * dt * dt);
  CHECK(r.state.t == doctest::Approx(dt));
  CHECK(r.state.u.tail(3).norm() == 0.0);
}

TEST_CASE("zero state is a fixed point") {
  for (const auto& law : {DampingLaw::constant(1), DampingLaw::hyperbolic(1, 2), DampingLaw::logistic(1, 2),
                          DampingLaw::shifted_power(0.1, 2), DampingLaw::pure_power(2)})
    for (Scheme s : {Scheme::implicit_midpoint, Scheme::semi_implicit_exponential}) {
      const Model m = Model::make(SpectralDomain::build(1, 8), law, Nonlinearity::bistable(5, 2.0));
      IntegratorConfig cfg;
      cfg.scheme = s;
      const auto tr = integrate(zero_state(m.domain), m, cfg, 0.1);
      CHECK(tr.states.back().u.norm() == 0.0);
      CHECK(tr.states.back().v.norm() == 0.0);
    }
}

TEST_CASE("scalar damping solve") {
  IntegratorConfig cfg;
  const auto hyp = DampingLaw::hyperbolic(1, 2);
  const auto r = solve_damping_scalar([](double s) { return 1.0 / (1.0 + s); }, hyp, cfg);
  const double ref = oracle::bisect(
      [](double s) {
        const double m = 1.0 / (1.0 + s);
        return s - (1.0 + m) / (2.0 + m);
      },
      0.0, 1.0);
  CHECK(r.sigma > 0.0);
  CHECK(r.sigma < 1.0);
  CHECK(std::abs(r.sigma - ref) <= 1e-12);

  const auto c = solve_damping_scalar([](double) { return 0.7; }, hyp, cfg);
  CHECK(c.sigma == doctest::Approx(hyp.J(0.7)).epsilon(1e-14));

  const auto k = solve_damping_scalar([](double s) { return 1.0 / (1.0 + s); }, DampingLaw::constant(2.5), cfg);
  CHECK(k.sigma == 2.5);
  CHECK(k.iterations == 0);

  // Steep law: the fixed point map is not a contraction, bisection must still land.
  const auto steep = DampingLaw::shifted_power(0.1, 6);
  const auto s = solve_damping_scalar([](double x) { return 4.0 / (1.0 + x) / (1.0 + x); }, steep, cfg);
  CHECK(std::abs(s.sigma - steep.J(4.0 / (1.0 + s.sigma) / (1.0 + s.sigma))) <= 1e-10 * (1.0 + s.sigma));

  for (double init : {0.0, 0.3, 5.0}) {
    const auto u = solve_damping_scalar([](double x) { return 1.0 / (1.0 + x); }, hyp, cfg, init);
    CHECK(std::abs(u.sigma - ref) <= 1e-12);
  }
}

TEST_CASE("integrate bookkeeping") {
  const Model m = quintic(8);
  IntegratorConfig cfg;
  SplitMix64 rng(1);
  const ModalState s0 = random_state(m.domain, rng, 1.0, 1.0, 4);
  const auto t0 = integrate(s0, m, cfg, 0.0);
  CHECK(t0.states.size() == 1);
  CHECK(t0.steps() == 0);

  const auto tr = integrate(s0, m, cfg, 0.1, 10);
  CHECK(tr.steps() == 100);
  CHECK(tr.states.size() == 11);
  CHECK(tr.states.back().t == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(tr.sample_steps.back() == 100);

  const auto odd = integrate(s0, m, cfg, 0.1, 30);
  CHECK(odd.states.size() == 5);  // 0, 30, 60, 90 and the final step
  CHECK(odd.sample_steps.back() == 100);

  int calls = 0;
  const std::vector<Observer> obs{[&](const StepView&) { ++calls; }};
  integrate(s0, m, cfg, 0.1, 10, obs);
  CHECK(calls == 11);

  IntegratorConfig bad = cfg;
  bad.dt = -1.0;
  CHECK_THROWS_AS(bad.validate(), InvalidArgument);
  CHECK_THROWS_AS(integrate(s0, m, bad, 1.0), InvalidArgument);
  ModalState nan_state = s0;
  nan_state.u[0] = std::nan("");
  CHECK_THROWS(integrate(nan_state, m, cfg, 0.1));
  CHECK(parse_scheme("semi_implicit_exponential") == Scheme::semi_implicit_exponential);
  CHECK_THROWS_AS(parse_scheme("rk4"), InvalidArgument);
}

TEST_CASE("linear oscillation over ten time units") {
  const Model m = quintic(4);
  const auto tr = integrate(ModalState{m.domain.basis(1), m.domain.zero_field(), 0.0}, m, linear_cfg(1e-3), 10.0);
  double err = 0.0;
  for (const auto& s : tr.states) err = std::max(err, std::abs(s.u[0] - std::cos(s.t)));
  CHECK(err <= 1e-5);
}

TEST_CASE("damped single mode against the closed form") {
  const Model m = quintic(4);
  for (Scheme s : {Scheme::implicit_midpoint, Scheme::semi_implicit_exponential}) {
    IntegratorConfig cfg = linear_cfg(1e-4, 1.0);
    cfg.scheme = s;
    const auto tr = integrate(ModalState{m.domain.basis(1), m.domain.zero_field(), 0.0}, m, cfg, 1.0, 100);
    double err = 0.0;
    for (const auto& st : tr.states) {
      err = std::max(err, std::abs(st.u[0] - oracle::damped_mode(1.0, 1.0, 1.0, 0.0, st.t)));
      err = std::max(err, std::abs(st.v[0] - oracle::damped_mode_velocity(1.0, 1.0, 1.0, 0.0, st.t)));
    }
    CHECK(err <= 1e-6);
  }
  // Higher mode and nonzero velocity, exponential scheme is exact for linear data.
  IntegratorConfig cfg = linear_cfg(1e-2, 0.6);
  cfg.scheme = Scheme::semi_implicit_exponential;
  const ModalState s0{m.domain.basis(3), 2.0 * m.domain.basis(3), 0.0};
  const auto tr = integrate(s0, m, cfg, 2.0);
  CHECK(tr.states.back().u[2] == doctest::Approx(oracle::damped_mode(0.6, 9.0, 1.0, 2.0, 2.0)).epsilon(1e-10));
}

TEST_CASE("midpoint scheme is time reversible on the undamped linear flow") {
  const Model m = Model::make(SpectralDomain::build(1, 8), DampingLaw::constant(1), Nonlinearity::odd_power(5));
  SplitMix64 rng(3);
  const ModalState s0 = random_state(m.domain, rng, 1.0, 1.0, 4);
  IntegratorConfig lin = linear_cfg(1e-2);
  ModalState fwd = s0;
  for (int i = 0; i < 50; ++i) fwd = step(fwd, m, lin).state;
  ModalState back{fwd.u, -fwd.v, 0.0};
  for (int i = 0; i < 50; ++i) back = step(back, m, lin).state;
  CHECK((back.u - s0.u).norm() <= 1e-12);
  CHECK((back.v + s0.v).norm() <= 1e-12);
}

TEST_CASE("midpoint energy identity converges at second order") {
  const Model m = quintic(16);
  SplitMix64 rng(2);
  const ModalState s0 = random_state(m.domain, rng, 1.5, 1.0, 8);
  std::vector<double> res;
  for (double dt : {4e-3, 2e-3, 1e-3}) {
    IntegratorConfig cfg;
    cfg.dt = dt;
    res.push_back(std::abs(energy_identity_residual(integrate(s0, m, cfg, 2.0, 100))));
  }
  CHECK(res[2] <= 1e-6);
  CHECK(std::log2(res[0] / res[1]) >= 1.9);
  CHECK(std::log2(res[1] / res[2]) >= 1.9);
}

TEST_CASE("linear undamped energy is conserved to round-off") {
  const Model m = quintic(16);
  SplitMix64 rng(8);
  const ModalState s0 = random_state(m.domain, rng, 2.0, 0.5, 0);
  const auto tr = integrate(s0, m, linear_cfg(1e-2), 5.0, 50);
  CHECK(std::abs(energy_identity_residual(tr)) <= 1e-10);
}

TEST_CASE("growth guard stops a blow-up") {
  const Model m = Model::make(SpectralDomain::build(1, 4), DampingLaw::constant(1), Nonlinearity::odd_power(5));
  IntegratorConfig cfg;
  cfg.dt = 10.0;
  cfg.scheme = Scheme::semi_implicit_exponential;
  const ModalState s0{5.0 * m.domain.basis(1), m.domain.zero_field(), 0.0};
  CHECK_THROWS_AS(integrate(s0, m, cfg, 100.0), IntegrationFailed);
}

TEST_CASE("parabolic companion") {
  const Model m = quintic(4);
  const double ell = default_parabolic_ell(m);
  CHECK(ell == doctest::Approx(4.0));

  IntegratorConfig lin;
  lin.dt = 1e-3;
  lin.linear_test_mode = true;
  const auto tr = parabolic_integrate(m.domain.basis(1), m, ell, m.domain.zero_field(), lin, 1.0, 100);
  for (std::size_t i = 0; i < tr.times.size(); ++i)
    CHECK(std::abs(tr.states[i][0] - std::exp(-(1.0 + ell) * tr.times[i])) <= 1e-8);

  // Fixed point: z* solving Lambda z + ell Lambda^{-1} z + P g(z) = hhat.
  const Model mb = Model::make(SpectralDomain::build(1, 8), DampingLaw::constant(1), Nonlinearity::bistable(5, 2.0));
  SplitMix64 rng(5);
  const Field z = random_smooth_field(mb.domain, rng, 1.0);
  const auto& lam = mb.domain.eigenvalues();
  const Field hhat = (lam.array() * z.array() + ell * z.array() / lam.array()).matrix() + apply_nonlinearity(mb, z);
  IntegratorConfig cfg;
  cfg.dt = 1e-2;
  const auto fp = parabolic_integrate(z, mb, ell, hhat, cfg, 1.0, 10);
  double drift = 0.0;
  for (const auto& s : fp.states) drift = std::max(drift, (s - z).norm());
  CHECK(drift <= 1e-8);

  // Monotone g without forcing: the norm decays.
  const auto dec = parabolic_integrate(3.0 * m.domain.basis(1), m, ell, m.domain.zero_field(), cfg, 1.0);
  for (std::size_t i = 1; i < dec.states.size(); ++i) CHECK(dec.states[i].norm() < dec.states[i - 1].norm());
}
