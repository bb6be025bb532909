#pragma once

#include "nlwave/integrator.hpp"
#include "nlwave/model.hpp"
#include "nlwave/spectral.hpp"

#include <optional>
#include <vector>

namespace nlwave {

struct EnergyReport {
  double t = 0.0;
  double e_norm_sq = 0.0;     ///< |xi|_E^2
  double potential = 0.0;     ///< 2 <G(u), 1>
  double forcing_term = 0.0;  ///< 2 <h, u>
  double E_u = 0.0;           ///< e_norm_sq + potential - forcing_term
  double Phi = 0.0;           ///< same value, in its Lyapunov role
  double cumulative_dissipation = 0.0;
  double identity_residual = 0.0;  ///< E_u(t) + D(t) - E_u(0)
};

/// Instantaneous energy.  `include_potential` is false for linear test runs.
EnergyReport energy(const ModalState& state, const Model& model, bool include_potential = true);

/// Energies at every sample, with dissipation and identity residual filled in.
std::vector<EnergyReport> energy_trace(const Trajectory& traj);

/// (E_u(T) + D(T) - E_u(0)) / max(1, |E_u(0)|).
double energy_identity_residual(const Trajectory& traj);

struct LyapunovTrace {
  std::vector<double> times;
  std::vector<double> phi;
  std::vector<double> dissipation;  ///< D at each sample
  double residual_scale = 0.0;      ///< reference scale of the identity residual
  double tolerance = 0.0;           ///< 10 x residual_scale
  double max_increase = 0.0;        ///< largest Phi(t_{i+1}) - Phi(t_i)
  double max_balance_error = 0.0;   ///< largest |Phi(0) - Phi(t_i) - D(t_i)|
  bool non_increasing = false;
  bool balance_ok = false;
  bool strictly_decreasing = false;  ///< overall drop exceeds the tolerance
};

/// Phi along the samples.  Without an explicit scale the reference is the largest
/// running identity residual |Phi(0) - Phi(t) - D(t)| (floored at round-off level).
LyapunovTrace lyapunov_trace(const Trajectory& traj, std::optional<double> residual_scale = std::nullopt);

/// Running trapezoid values of int |v|^{2p+2} dt over the samples.
std::vector<double> dissipation_integral(const Trajectory& traj, double p);

/// |v|_{H^{-varsigma}}, varsigma in (0, 1].
double negative_norm_velocity(const SpectralDomain& domain, const ModalState& state,
                              double sigma_exp = 1.0);

/// |u|_{L^12} by grid quadrature.
double l12_norm(const SpectralDomain& domain, const Field& u);

/// (int_{t1}^{t2} |u|_{L^12}^4 dt)^{1/4} by trapezoid over the samples, with the
/// integrand linearly interpolated at the window ends.
double strichartz_norm(const Trajectory& traj, double t1, double t2);

struct PerturbedEnergyReport {
  double rho = 0.0;
  double E_rho = 0.0;  ///< |xi|^2 + 2<G(u),1> + rho <v,u> - 2<h,u>
  double E_u = 0.0;
  double cross = 0.0;  ///< <v, u>
  double Q = 0.0;
  double G = 0.0;
  double I = 0.0;
};

/// Multiplier energy for v + rho u; throws for rho < 0 or rho > sqrt(lambda_1).
PerturbedEnergyReport perturbed_energy(const ModalState& state, const Model& model, double rho);

/// (|u|_{H^2}^2 + |v|_{H^1}^2)^{1/2}.
double e1_norm(const SpectralDomain& domain, const ModalState& state);

struct NormTrace {
  std::vector<double> times;
  std::vector<double> values;
};

NormTrace velocity_negative_norm_trace(const Trajectory& traj, double sigma_exp = 1.0);
NormTrace e1_norm_trace(const Trajectory& traj);
NormTrace energy_norm_trace(const Trajectory& traj);

}  // namespace nlwave
