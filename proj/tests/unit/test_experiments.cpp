#include <doctest.h>

#include "nlwave/errors.hpp"
#include "nlwave/experiments.hpp"
#include "nlwave/random.hpp"

#include <cmath>

using namespace nlwave;

namespace {

IntegratorConfig step(double dt) {
  IntegratorConfig c;
  c.dt = dt;
  return c;
}

}  // namespace

TEST_CASE("ensembles are reproducible and independent of the count") {
  const auto d = SpectralDomain::build(1, 8);
  EnsembleSpec spec;
  spec.count = 3;
  spec.r_min = 1.0;
  spec.r_max = 2.0;
  const auto a = ensemble_states(d, spec);
  spec.count = 5;
  const auto b = ensemble_states(d, spec);
  REQUIRE(a.size() == 3);
  REQUIRE(b.size() == 5);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK((a[i].u - b[i].u).norm() == 0.0);
    const double n = energy_norm(d, a[i]);
    CHECK(n >= 1.0 - 1e-12);
    CHECK(n <= 2.0 + 1e-12);
  }
  const auto pairs = ensemble_pairs(d, spec, 1e-3);
  for (const auto& p : pairs) CHECK(energy_distance(d, p.first, p.second) == doctest::Approx(1e-3));
  spec.r_min = 3.0;
  CHECK_THROWS_AS(ensemble_states(d, spec), InvalidArgument);
}

TEST_CASE("zero state enters the absorbing ball at once") {
  const Model m = Model::make(SpectralDomain::build(1, 8), DampingLaw::hyperbolic(1, 2), Nonlinearity::odd_power(5));
  EnsembleSpec spec;
  spec.count = 1;
  spec.r_min = 0.0;
  spec.r_max = 0.0;
  DissipativityOptions o;
  o.horizon = 1.0;
  const auto r = dissipativity_probe(m, spec, step(1e-2), o);
  CHECK(r.scalars.at("R_emp") == 0.0);
  CHECK(r.scalars.at("max_entry_time") == 0.0);
  CHECK(r.scalars.at("exit_count") == 0.0);
  CHECK(r.passed());
}

TEST_CASE("monotone model decays to zero") {
  for (const auto& law : {DampingLaw::hyperbolic(1, 2), DampingLaw::logistic(1, 2), DampingLaw::constant(1)}) {
    const Model m = Model::make(SpectralDomain::build(1, 8), law, Nonlinearity::odd_power(5));
    EnsembleSpec spec;
    spec.count = 3;
    DissipativityOptions o;
    o.horizon = 200.0;
    o.stride = 100;
    const auto r = dissipativity_probe(m, spec, step(1e-2), o);
    CHECK(r.scalars.at("R_emp") <= 1e-3);
    CHECK(r.verdicts.at("positively_invariant"));
  }
}

TEST_CASE("equilibrium data has a constant e1 norm") {
  const Model m = Model::make(SpectralDomain::build(1, 8), DampingLaw::hyperbolic(1, 2), Nonlinearity::bistable(5, 2.0));
  EnsembleSpec spec;
  spec.count = 1;
  spec.r_min = spec.r_max = 0.0;
  E1DissipativityOptions o;
  o.horizon = 2.0;
  const auto r = e1_dissipativity_probe(m, spec, step(1e-2), o);
  CHECK(r.scalars.at("R1_emp") == 0.0);
  CHECK(r.scalars.at("max_late_slope") == 0.0);
  CHECK(r.passed());
}

TEST_CASE("Lipschitz probe") {
  const Model m = Model::make(SpectralDomain::build(1, 8), DampingLaw::constant(1), Nonlinearity::odd_power(5));
  const auto& d = m.domain;
  SplitMix64 rng(2);
  const ModalState a = random_state(d, rng, 1.0, 1.0, 4);
  CHECK_THROWS_AS(lipschitz_probe(m, {{a, a}}, step(1e-2)), InvalidArgument);

  // The undamped linear flow is an isometry of the energy norm.
  IntegratorConfig lin = step(1e-2);
  lin.linear_test_mode = true;
  const ModalState b = random_state(d, rng, 1.0, 1.0, 4);
  const auto r = lipschitz_probe(m, {{a, b}}, lin);
  for (double rho : r.traces.front().data[1]) CHECK(rho == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(r.scalars.at("L_emp")) <= 1e-12);
  CHECK(r.passed());
}

TEST_CASE("quasi-stability horizon and rejection") {
  const Model m = Model::make(SpectralDomain::build(1, 8), DampingLaw::constant(1), Nonlinearity::odd_power(5));
  CHECK(default_gamma0(m) == 0.5);
  CHECK(quasistability_horizon(0.5, default_gamma0(m)) == doctest::Approx(std::log(96.0) / 0.5));
  CHECK(quasistability_horizon(0.5, 0.5) == doctest::Approx(9.1287).epsilon(1e-4));
  CHECK_THROWS_AS(quasistability_horizon(1.0, 0.5), InvalidArgument);

  SplitMix64 rng(3);
  const ModalState a = random_state(m.domain, rng, 1.0, 1.0, 4);
  CHECK_THROWS_AS(quasistability_probe(m, {{a, a}}, step(1e-2)), InvalidArgument);
}

TEST_CASE("quasi-stability in the linear limit") {
  const Model m = Model::make(SpectralDomain::build(1, 8), DampingLaw::constant(1), Nonlinearity::odd_power(5));
  IntegratorConfig lin = step(1e-2);
  lin.linear_test_mode = true;
  lin.linear_damping = 1.0;
  EnsembleSpec spec;
  spec.count = 4;
  spec.r_min = 0.5;
  spec.r_max = 1.0;
  QuasiStabilityOptions o;
  o.eta = 0.5;
  const auto r = quasistability_probe(m, ensemble_pairs(m.domain, spec, std::nullopt), lin, o);
  CHECK(r.scalars.at("mu_emp") >= 0.0);
  const double T = r.scalars.at("horizon");
  const bool insufficient = std::exp(-T) > 0.25 / 16.0;
  CHECK(r.scalars.at("head_sufficient") == (insufficient ? 0.0 : 1.0));
}

TEST_CASE("Galerkin probe on a single linear mode") {
  const Model m = Model::make(SpectralDomain::build(1, 4), DampingLaw::constant(1), Nonlinearity::odd_power(5));
  IntegratorConfig lin = step(1e-2);
  lin.linear_test_mode = true;
  ConvergenceOptions o;
  o.modes = {4, 8, 16};
  o.horizon = 1.0;
  const auto r = galerkin_convergence_probe(m, ModalState{m.domain.basis(1), m.domain.zero_field(), 0.0}, lin, o);
  for (double x : r.traces.front().data[2]) CHECK(x == 0.0);
}

TEST_CASE("attractor of the monotone model is the origin") {
  const Model m = Model::make(SpectralDomain::build(1, 8), DampingLaw::hyperbolic(1, 2), Nonlinearity::odd_power(5));
  const auto set = find_equilibria(m);
  EnsembleSpec spec;
  spec.count = 2;
  AttractorOptions o;
  o.horizon = 200.0;
  o.stride = 200;
  const auto r = attractor_probe(m, set, spec, step(1e-2), o);
  CHECK(r.scalars.at("unstable_seeds") == 0.0);
  CHECK(r.scalars.at("final_max_distance") <= 1e-3);
  CHECK(r.verdicts.at("distance_decay"));
  CHECK(r.verdicts.at("lyapunov_non_increasing"));
  CHECK_THROWS_AS(attractor_probe(m, EquilibriumSet{}, spec, step(1e-2), o), InvalidArgument);
}

TEST_CASE("Lyapunov probe on a small ensemble") {
  const Model m = Model::make(SpectralDomain::build(1, 8), DampingLaw::shifted_power(0.1, 2), Nonlinearity::odd_power(5));
  EnsembleSpec spec;
  spec.count = 2;
  LyapunovOptions o;
  o.horizon = 2.0;
  const auto r = lyapunov_probe(m, spec, step(1e-2), o);
  CHECK(r.verdicts.at("non_increasing"));
  CHECK(r.verdicts.at("balance"));
}
