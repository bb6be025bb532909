#include "nlwave/diagnostics.hpp"

#include "nlwave/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nlwave {

EnergyReport energy(const ModalState& state, const Model& model, bool include_potential) {
  const auto& d = model.domain;
  EnergyReport r;
  r.t = state.t;
  const double hu = hs_norm(d, state.u, 1.0);
  r.e_norm_sq = hu * hu + state.v.squaredNorm();
  r.potential = include_potential ? 2.0 * potential_integral(model, state.u) : 0.0;
  r.forcing_term = 2.0 * model.forcing.dot(state.u);
  r.E_u = r.e_norm_sq + r.potential - r.forcing_term;
  r.Phi = r.E_u;
  return r;
}

std::vector<EnergyReport> energy_trace(const Trajectory& traj) {
  std::vector<EnergyReport> out;
  out.reserve(traj.states.size());
  const bool with_potential = !traj.config.linear_test_mode;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    EnergyReport r = energy(traj.states[i], traj.model, with_potential);
    r.cumulative_dissipation = traj.cumulative_dissipation[i];
    out.push_back(r);
  }
  if (!out.empty()) {
    const double e0 = out.front().E_u;
    for (auto& r : out) r.identity_residual = r.E_u + r.cumulative_dissipation - e0;
  }
  return out;
}

double energy_identity_residual(const Trajectory& traj) {
  if (traj.states.empty()) return 0.0;
  const bool with_potential = !traj.config.linear_test_mode;
  const double e0 = energy(traj.states.front(), traj.model, with_potential).E_u;
  const double eT = energy(traj.states.back(), traj.model, with_potential).E_u;
  return (eT + traj.cumulative_dissipation.back() - e0) / std::max(1.0, std::abs(e0));
}

LyapunovTrace lyapunov_trace(const Trajectory& traj, std::optional<double> residual_scale) {
  LyapunovTrace lt;
  const auto energies = energy_trace(traj);
  if (energies.empty()) return lt;
  for (const auto& e : energies) {
    lt.times.push_back(e.t);
    lt.phi.push_back(e.Phi);
    lt.dissipation.push_back(e.cumulative_dissipation);
  }
  const double phi0 = lt.phi.front();
  double balance = 0.0;
  for (const auto& e : energies) balance = std::max(balance, std::abs(e.identity_residual));
  lt.max_balance_error = balance;
  const double floor = 1e-13 * std::max(1.0, std::abs(phi0));
  lt.residual_scale = std::max(residual_scale.value_or(balance), floor);
  lt.tolerance = 10.0 * lt.residual_scale;

  double inc = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < lt.phi.size(); ++i) inc = std::max(inc, lt.phi[i + 1] - lt.phi[i]);
  lt.max_increase = lt.phi.size() > 1 ? inc : 0.0;
  lt.non_increasing = lt.max_increase <= lt.tolerance;
  lt.balance_ok = lt.max_balance_error <= lt.tolerance;
  lt.strictly_decreasing = lt.phi.back() < phi0 - lt.tolerance;
  return lt;
}

std::vector<double> dissipation_integral(const Trajectory& traj, double p) {
  if (!(p >= 0.0)) throw InvalidArgument("dissipation_integral requires p >= 0");
  std::vector<double> out;
  out.reserve(traj.states.size());
  double acc = 0.0;
  double prev = 0.0;
  for (std::size_t i = 0; i < traj.states.size(); ++i) {
    const double val = std::pow(traj.states[i].v.norm(), 2.0 * p + 2.0);
    if (i > 0) acc += 0.5 * (prev + val) * (traj.states[i].t - traj.states[i - 1].t);
    prev = val;
    out.push_back(acc);
  }
  return out;
}

double negative_norm_velocity(const SpectralDomain& domain, const ModalState& state, double sigma_exp) {
  if (!(sigma_exp > 0.0 && sigma_exp <= 1.0))
    throw InvalidArgument("negative_norm_velocity requires varsigma in (0, 1]");
  return hs_norm(domain, state.v, -sigma_exp);
}

double l12_norm(const SpectralDomain& domain, const Field& u) {
  const GridValues g = domain.to_grid(u);
  double sum = 0.0;
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    const double a2 = g[j] * g[j];
    const double a4 = a2 * a2;
    sum += a4 * a4 * a4;
  }
  return std::pow(sum * domain.quadrature_weight(), 1.0 / 12.0);
}

double strichartz_norm(const Trajectory& traj, double t1, double t2) {
  if (traj.states.empty()) throw InvalidArgument("strichartz_norm: empty trajectory");
  const double t_start = traj.states.front().t;
  const double t_end = traj.states.back().t;
  const double slack = 1e-12 * std::max(1.0, std::abs(t_end));
  if (!(t1 <= t2) || t1 < t_start - slack || t2 > t_end + slack)
    throw InvalidArgument("strichartz_norm: window outside the trajectory span");
  t1 = std::max(t1, t_start);
  t2 = std::min(t2, t_end);

  const auto& d = traj.model.domain;
  std::vector<double> ts, f;
  for (const auto& s : traj.states) {
    ts.push_back(s.t);
    f.push_back(std::pow(l12_norm(d, s.u), 4.0));
  }
  auto value_at = [&](double t) {
    auto it = std::lower_bound(ts.begin(), ts.end(), t);
    if (it == ts.begin()) return f.front();
    if (it == ts.end()) return f.back();
    const auto i = static_cast<std::size_t>(it - ts.begin());
    const double w = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
    return (1.0 - w) * f[i - 1] + w * f[i];
  };
  // Trapezoid over [t1, t2] on the sample nodes inside plus the interpolated ends.
  std::vector<std::pair<double, double>> nodes{{t1, value_at(t1)}};
  for (std::size_t i = 0; i < ts.size(); ++i)
    if (ts[i] > t1 && ts[i] < t2) nodes.emplace_back(ts[i], f[i]);
  nodes.emplace_back(t2, value_at(t2));
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
    integral += 0.5 * (nodes[i].second + nodes[i + 1].second) * (nodes[i + 1].first - nodes[i].first);
  return std::pow(integral, 0.25);
}

PerturbedEnergyReport perturbed_energy(const ModalState& state, const Model& model, double rho) {
  const auto& d = model.domain;
  if (!(rho >= 0.0) || rho > std::sqrt(d.lambda1()))
    throw InvalidArgument("perturbed_energy requires 0 <= rho <= sqrt(lambda_1)");
  const EnergyReport e = energy(state, model);
  PerturbedEnergyReport r;
  r.rho = rho;
  r.E_u = e.E_u;
  r.cross = state.v.dot(state.u);
  r.E_rho = e.E_u + rho * r.cross;

  const double vv = state.v.squaredNorm();
  const double J = model.damping.J(vv);
  const double hu = hs_norm(d, state.u, 1.0);
  r.Q = (2.0 * J - 1.25 * rho) * vv + 0.75 * rho * hu * hu + rho * J * r.cross -
        0.25 * rho * rho * r.cross;
  r.G = rho * apply_nonlinearity(model, state.u).dot(state.u) - 0.5 * rho * (0.5 * e.potential);
  r.I = -0.5 * rho * model.forcing.dot(state.u);
  return r;
}

double e1_norm(const SpectralDomain& domain, const ModalState& state) {
  const double a = hs_norm(domain, state.u, 2.0);
  const double b = hs_norm(domain, state.v, 1.0);
  return std::sqrt(a * a + b * b);
}

namespace {

template <class F>
NormTrace map_trace(const Trajectory& traj, F&& fn) {
  NormTrace nt;
  for (const auto& s : traj.states) {
    nt.times.push_back(s.t);
    nt.values.push_back(fn(s));
  }
  return nt;
}

}  // namespace

NormTrace velocity_negative_norm_trace(const Trajectory& traj, double sigma_exp) {
  return map_trace(traj, [&](const ModalState& s) {
    return negative_norm_velocity(traj.model.domain, s, sigma_exp);
  });
}

NormTrace e1_norm_trace(const Trajectory& traj) {
  return map_trace(traj, [&](const ModalState& s) { return e1_norm(traj.model.domain, s); });
}

NormTrace energy_norm_trace(const Trajectory& traj) {
  return map_trace(traj, [&](const ModalState& s) { return energy_norm(traj.model.domain, s); });
}

}  // namespace nlwave
