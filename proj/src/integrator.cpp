#include "nlwave/integrator.hpp"

#include "nlwave/errors.hpp"
#include "nlwave/krylov.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nlwave {

std::string scheme_name(Scheme s) {
  return s == Scheme::implicit_midpoint ? "implicit_midpoint" : "semi_implicit_exponential";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "implicit_midpoint") return Scheme::implicit_midpoint;
  if (name == "semi_implicit_exponential") return Scheme::semi_implicit_exponential;
  throw InvalidArgument("unknown scheme '" + name +
                        "' (valid: implicit_midpoint, semi_implicit_exponential)");
}

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("integrator dt must be > 0");
  if (!(scalar_tol > 0.0)) throw InvalidArgument("integrator scalar_tol must be > 0");
  if (scalar_max_iter < 1) throw InvalidArgument("integrator scalar_max_iter must be >= 1");
  if (!(nonlinear_tol > 0.0)) throw InvalidArgument("integrator nonlinear_tol must be > 0");
  if (nonlinear_max_sweeps < 1) throw InvalidArgument("integrator nonlinear_max_sweeps must be >= 1");
  if (!(linear_damping >= 0.0)) throw InvalidArgument("integrator linear_damping must be >= 0");
  if (!(growth_guard > 1.0)) throw InvalidArgument("integrator growth_guard must be > 1");
}

// ---------------------------------------------------------------------------

ScalarSolveResult solve_damping_scalar(const VelocityNormMap& m, const DampingLaw& law,
                                       const IntegratorConfig& cfg,
                                       std::optional<double> initial) {
  ScalarSolveResult out;
  if (law.is_constant()) {
    out.sigma = law.J0();
    return out;
  }
  const double tol = cfg.scalar_tol;
  auto target = [&](double sigma) {
    const double mm = m(sigma);
    if (!std::isfinite(mm) || mm < 0.0) throw ScalarSolveFailed("velocity-norm map returned an invalid value");
    return law.J(mm);
  };

  // Damped fixed point.
  const double j_at_zero = target(0.0);
  double sigma = initial.value_or(j_at_zero);
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) sigma = j_at_zero;
  double omega = 1.0;
  double last_res = std::numeric_limits<double>::infinity();
  const int fp_budget = std::min(cfg.scalar_max_iter, 30);
  for (int it = 0; it < fp_budget; ++it) {
    const double t = target(sigma);
    const double res = sigma - t;
    ++out.iterations;
    if (std::abs(res) <= tol * (1.0 + sigma)) {
      out.sigma = sigma;
      return out;
    }
    if (std::abs(res) >= last_res) omega *= 0.5;
    last_res = std::abs(res);
    sigma = std::max(0.0, sigma - omega * res);
  }

  // Bisection on phi(sigma) = sigma - J(m(sigma)), increasing under the preconditions.
  out.used_bisection = true;
  double lo = 0.0;
  double hi = std::max(j_at_zero, tol);
  double phi_hi = hi - target(hi);
  for (int k = 0; phi_hi < 0.0 && k < 60; ++k) {
    lo = hi;
    hi *= 2.0;
    phi_hi = hi - target(hi);
  }
  if (phi_hi < 0.0)
    throw ScalarSolveFailed("damping scalar could not be bracketed (non-monotone model?)");
  if (lo - target(lo) > tol * (1.0 + lo))
    throw ScalarSolveFailed("damping scalar bracket is inconsistent (non-monotone model?)");
  for (int it = 0; it < std::max(cfg.scalar_max_iter, 200); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double phi = mid - target(mid);
    ++out.iterations;
    if (std::abs(phi) <= tol * (1.0 + mid) || hi - lo <= 1e-16 * (1.0 + hi)) {
      out.sigma = mid;
      return out;
    }
    (phi < 0.0 ? lo : hi) = mid;
  }
  throw ScalarSolveFailed("damping scalar bisection did not converge");
}

// ---------------------------------------------------------------------------

namespace {

double state_norm(const SpectralDomain& d, const Field& u, const Field& v) {
  const double a = hs_norm(d, u, 1.0);
  const double b = v.norm();
  return std::sqrt(a * a + b * b);
}

double effective_sigma_constant(const Model& model, const IntegratorConfig& cfg) {
  return cfg.linear_test_mode ? cfg.linear_damping : model.damping.J0();
}

bool damping_is_fixed(const Model& model, const IntegratorConfig& cfg) {
  return cfg.linear_test_mode || model.damping.is_constant();
}

StepResult midpoint_step(const ModalState& s0, const Model& model, const IntegratorConfig& cfg,
                         double dt) {
  const auto& d = model.domain;
  const Eigen::ArrayXd lam = d.eigenvalues().array();
  const double half = 0.5 * dt;
  const Eigen::ArrayXd base_diag = 1.0 + half * half * lam;  // without damping
  // Part of the right-hand side independent of the iterate.
  const Field r0 = s0.v + half * (-(lam * s0.u.array()).matrix() + model.forcing);
  const bool linear = cfg.linear_test_mode;
  const bool fixed_sigma = damping_is_fixed(model, cfg);

  Field vm = s0.v;
  Field um = s0.u + half * vm;
  double sigma = fixed_sigma ? effective_sigma_constant(model, cfg) : model.damping.J(vm.squaredNorm());
  const double scale = 1.0 + state_norm(d, s0.u, s0.v);

  StepResult res;
  bool newton = false;
  double prev_inc = std::numeric_limits<double>::infinity();
  int max_sweeps = linear ? 2 : cfg.nonlinear_max_sweeps;
  int newton_sweeps = 0;
  for (int sweep = 1;; ++sweep) {
    const Field f = linear ? d.zero_field() : apply_nonlinearity(model, um);
    const Field rhs = r0 - half * f;
    if (!fixed_sigma) {
      auto m = [&](double s) {
        return (rhs.array() / (base_diag + half * s)).matrix().squaredNorm();
      };
      sigma = solve_damping_scalar(m, model.damping, cfg, sigma).sigma;
    }
    const Eigen::ArrayXd diag = base_diag + half * sigma;
    Field vm_new;
    if (!newton) {
      vm_new = (rhs.array() / diag).matrix();
    } else {
      // (D + dt^2/4 P g'(um)) delta = rhs - D vm, symmetrically scaled by D^{-1/2}.
      const GridValues gp = nonlinearity_derivative_on_grid(model, um);
      const Eigen::ArrayXd isd = diag.rsqrt();
      const LinearOperator op = [&](const Field& y) -> Field {
        const Field x = (isd * y.array()).matrix();
        Field out = y + half * half * (isd * apply_linearized(d, gp, x).array()).matrix();
        return out;
      };
      const Field g = rhs - (diag * vm.array()).matrix();
      Field y;
      const auto kr = minres(op, (isd * g.array()).matrix(), y, 1e-14, 400);
      if (kr.breakdown) throw NonlinearSolveFailed("midpoint Newton: inner Krylov breakdown");
      vm_new = vm + (isd * y.array()).matrix();
      ++newton_sweeps;
    }
    const Field um_new = s0.u + half * vm_new;
    if (!vm_new.allFinite() || !um_new.allFinite())
      throw NonFiniteState("midpoint step produced a non-finite iterate");
    const double inc = state_norm(d, um_new - um, vm_new - vm);
    vm = vm_new;
    um = um_new;
    res.sweeps = sweep;
    if (linear && sweep >= 1) break;
    if (inc <= cfg.nonlinear_tol * scale) break;
    // Switch to Newton when the contraction stalls.
    if (!newton && ((sweep >= 3 && inc > 0.5 * prev_inc) || sweep >= cfg.nonlinear_max_sweeps)) {
      newton = true;
      res.used_newton = true;
    }
    prev_inc = inc;
    if (sweep >= max_sweeps + (newton ? 30 : 0) || newton_sweeps > 30)
      throw NonlinearSolveFailed("implicit midpoint: nonlinear iteration did not converge");
  }
  if (!fixed_sigma) {
    // Final consistency of the coefficient with the converged midpoint velocity.
    const double mismatch = sigma - model.damping.J(vm.squaredNorm());
    if (std::abs(mismatch) > 1e3 * cfg.scalar_tol * (1.0 + sigma) + 1e-9)
      throw ScalarSolveFailed("damping scalar inconsistent with converged midpoint velocity");
  }

  res.state.u = 2.0 * um - s0.u;
  res.state.v = 2.0 * vm - s0.v;
  res.state.t = s0.t + dt;
  res.sigma = sigma;
  res.dissipation = 2.0 * sigma * vm.squaredNorm() * dt;
  return res;
}

// Exact flow of w'' + sigma w' + lambda w = F over dt, per mode.
void damped_oscillator_flow(const Eigen::ArrayXd& lam, double sigma, const Field& F, const Field& u0,
                            const Field& v0, double dt, Field& u1, Field& v1) {
  const Eigen::Index n = lam.size();
  u1.resize(n);
  v1.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double l = lam[k];
    const double shift = F[k] / l;
    const double w0 = u0[k] - shift;
    const double b = v0[k] + 0.5 * sigma * w0;
    const double z = l - 0.25 * sigma * sigma;
    double C, S;  // each already multiplied by exp(-sigma dt / 2)
    const double zt = z * dt * dt;
    const double decay = std::exp(-0.5 * sigma * dt);
    if (std::abs(zt) < 1e-6) {
      C = decay * (1.0 - zt / 2.0 + zt * zt / 24.0);
      S = decay * dt * (1.0 - zt / 6.0 + zt * zt / 120.0);
    } else if (z > 0.0) {
      const double w = std::sqrt(z);
      C = decay * std::cos(w * dt);
      S = decay * std::sin(w * dt) / w;
    } else {
      const double kap = std::sqrt(-z);
      const double ep = std::exp((kap - 0.5 * sigma) * dt);
      const double em = std::exp((-kap - 0.5 * sigma) * dt);
      C = 0.5 * (ep + em);
      S = 0.5 * (ep - em) / kap;
    }
    const double w1 = w0 * C + b * S;
    u1[k] = w1 + shift;
    v1[k] = b * C - z * w0 * S - 0.5 * sigma * w1;
  }
}

StepResult exponential_step(const ModalState& s0, const Model& model, const IntegratorConfig& cfg,
                            double dt) {
  const auto& d = model.domain;
  const Eigen::ArrayXd lam = d.eigenvalues().array();
  const Field F = cfg.linear_test_mode ? Field(model.forcing)
                                       : Field(model.forcing - apply_nonlinearity(model, s0.u));
  Field u1, v1;
  double sigma = effective_sigma_constant(model, cfg);
  if (!damping_is_fixed(model, cfg)) {
    auto m = [&](double s) {
      Field uu, vv;
      damped_oscillator_flow(lam, s, F, s0.u, s0.v, dt, uu, vv);
      return (0.5 * (vv + s0.v)).squaredNorm();
    };
    sigma = solve_damping_scalar(m, model.damping, cfg, model.damping.J(s0.v.squaredNorm())).sigma;
  }
  damped_oscillator_flow(lam, sigma, F, s0.u, s0.v, dt, u1, v1);
  StepResult res;
  res.state = ModalState{u1, v1, s0.t + dt};
  res.sigma = sigma;
  res.dissipation = 2.0 * sigma * (0.5 * (v1 + s0.v)).squaredNorm() * dt;
  res.sweeps = 1;
  return res;
}

}  // namespace

StepResult step(const ModalState& state, const Model& model, const IntegratorConfig& cfg) {
  return step(state, model, cfg, cfg.dt);
}

StepResult step(const ModalState& state, const Model& model, const IntegratorConfig& cfg, double dt) {
  if (!(dt > 0.0)) throw InvalidArgument("step size must be > 0");
  if (!state.u.allFinite() || !state.v.allFinite()) throw NonFiniteState("step: non-finite input state");
  const auto& d = model.domain;
  if (static_cast<std::size_t>(state.u.size()) != d.num_modes() ||
      static_cast<std::size_t>(state.v.size()) != d.num_modes())
    throw InvalidArgument("step: state does not match the model domain");

  StepResult res = cfg.scheme == Scheme::implicit_midpoint ? midpoint_step(state, model, cfg, dt)
                                                           : exponential_step(state, model, cfg, dt);
  if (!res.state.u.allFinite() || !res.state.v.allFinite())
    throw NonFiniteState("step produced a non-finite state");
  const double n0 = energy_norm(d, state);
  const double n1 = energy_norm(d, res.state);
  // Potential energy may turn into kinetic energy within a step, so the
  // reference includes it.
  double ref = n0;
  if (!cfg.linear_test_mode) ref = std::sqrt(n0 * n0 + std::max(0.0, 2.0 * potential_integral(model, state.u)));
  const double floor = 1e-8 + dt * model.forcing.norm();
  if (n1 > cfg.growth_guard * std::max(ref, floor))
    throw InstabilityDetected("energy norm grew by more than the guard factor in one step");
  return res;
}

std::vector<double> Trajectory::times() const {
  std::vector<double> t;
  t.reserve(states.size());
  for (const auto& s : states) t.push_back(s.t);
  return t;
}

Trajectory integrate(const ModalState& state0, const Model& model, const IntegratorConfig& cfg,
                     double horizon, int stride, std::span<const Observer> observers) {
  cfg.validate();
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw InvalidArgument("horizon must be >= 0");
  if (stride < 1) throw InvalidArgument("stride must be >= 1");

  Trajectory traj{model, cfg, 0.0, {}, {}, {}, {}, {}};
  const std::size_t n =
      horizon > 0.0 ? static_cast<std::size_t>(std::ceil(horizon / cfg.dt - 1e-9)) : 0;
  const double dt = n > 0 ? horizon / static_cast<double>(n) : cfg.dt;
  traj.dt = dt;
  traj.sigma.reserve(n);
  traj.dissipation.reserve(n);

  ModalState current = state0;
  double cumulative = 0.0;
  auto sample = [&](std::size_t k, double sigma, double diss) {
    traj.states.push_back(current);
    traj.sample_steps.push_back(k);
    traj.cumulative_dissipation.push_back(cumulative);
    for (const auto& obs : observers) obs(StepView{k, current.t, current, sigma, diss});
  };
  sample(0, 0.0, 0.0);
  for (std::size_t k = 1; k <= n; ++k) {
    StepResult r;
    try {
      r = step(current, model, cfg, dt);
    } catch (const IntegrationFailed&) {
      throw;
    } catch (const Error& e) {
      throw IntegrationFailed(e.what(), current.t);
    }
    current = std::move(r.state);
    current.t = state0.t + static_cast<double>(k) * dt;
    cumulative += r.dissipation;
    traj.sigma.push_back(r.sigma);
    traj.dissipation.push_back(r.dissipation);
    if (k % static_cast<std::size_t>(stride) == 0 || k == n) sample(k, r.sigma, r.dissipation);
  }
  return traj;
}

// ---------------------------------------------------------------------------

double default_parabolic_ell(const Model& model) {
  const double k1 = model.nonlinearity.constants().kappa1;
  return 4.0 * k1 * k1;
}

ParabolicTrajectory parabolic_integrate(const Field& z0, const Model& model, double ell,
                                        const Field& hhat, const IntegratorConfig& cfg,
                                        double horizon, int stride) {
  cfg.validate();
  if (!(ell > 0.0)) throw InvalidArgument("parabolic ell must be > 0");
  if (!(horizon >= 0.0)) throw InvalidArgument("horizon must be >= 0");
  if (stride < 1) throw InvalidArgument("stride must be >= 1");
  const auto& d = model.domain;
  if (static_cast<std::size_t>(z0.size()) != d.num_modes() ||
      static_cast<std::size_t>(hhat.size()) != d.num_modes())
    throw InvalidArgument("parabolic_integrate: field size mismatch");

  const std::size_t n =
      horizon > 0.0 ? static_cast<std::size_t>(std::ceil(horizon / cfg.dt - 1e-9)) : 0;
  const double dt = n > 0 ? horizon / static_cast<double>(n) : cfg.dt;
  const Eigen::ArrayXd lam = d.eigenvalues().array();
  const Eigen::ArrayXd a = lam + ell / lam;
  const Eigen::ArrayXd E = (-a * dt).exp();
  const Eigen::ArrayXd phi = -((-a * dt).expm1()) / a;  // (1 - e^{-a dt}) / a
  const Eigen::ArrayXd sqrt_phi = phi.sqrt();

  ParabolicTrajectory out;
  Field z = z0;
  out.times.push_back(0.0);
  out.states.push_back(z);
  for (std::size_t k = 1; k <= n; ++k) {
    // Residual of z+ = E z + phi (hhat - P g(z+)) at the predictor z+ = z.
    const Field gz = cfg.linear_test_mode ? d.zero_field() : apply_nonlinearity(model, z);
    const Field R = ((1.0 - E) * z.array() - phi * (hhat - gz).array()).matrix();
    Field delta;
    if (cfg.linear_test_mode) {
      delta = -R;
    } else {
      const GridValues gp = nonlinearity_derivative_on_grid(model, z);
      const LinearOperator op = [&](const Field& y) -> Field {
        const Field x = (sqrt_phi * y.array()).matrix();
        return y + (sqrt_phi * apply_linearized(d, gp, x).array()).matrix();
      };
      Field y;
      const auto kr = minres(op, (-(R.array() / sqrt_phi)).matrix(), y, 1e-14, 400);
      if (kr.breakdown) throw NonlinearSolveFailed("parabolic Newton: inner Krylov breakdown");
      delta = (sqrt_phi * y.array()).matrix();
    }
    z += delta;
    if (!z.allFinite()) throw NonFiniteState("parabolic_integrate produced a non-finite state");
    if (k % static_cast<std::size_t>(stride) == 0 || k == n) {
      out.times.push_back(static_cast<double>(k) * dt);
      out.states.push_back(z);
    }
  }
  return out;
}

}  // namespace nlwave
