#pragma once

#include "nlwave/integrator.hpp"
#include "nlwave/model.hpp"
#include "nlwave/steady_state.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nlwave {

/// Random initial data: energy norms uniform in [r_min, r_max], coefficients
/// lambda_k^{-decay} N(0,1) on modes with axis index <= mode_band (0 = all).
struct EnsembleSpec {
  int count = 8;
  double r_min = 1.0;
  double r_max = 5.0;
  int mode_band = 4;
  std::uint64_t seed = 1;
  double decay = 1.0;
  void validate() const;
};

/// Member i is drawn from stream i of the seed, so members do not depend on count.
std::vector<ModalState> ensemble_states(const SpectralDomain& domain, const EnsembleSpec& spec);

using StatePair = std::pair<ModalState, ModalState>;

/// Pairs whose first member is ensemble member i.  With a separation the partner is
/// the base plus `separation` times a random unit (energy norm) direction; without
/// one the partner is an independent draw.
std::vector<StatePair> ensemble_pairs(const SpectralDomain& domain, const EnsembleSpec& spec,
                                      std::optional<double> separation);

/// Named columns of equal length.
struct Series {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::string> units;
  std::vector<std::vector<double>> data;  ///< data[column][row]
  std::size_t rows() const { return data.empty() ? 0 : data.front().size(); }
};

struct ProbeReport {
  std::string name;
  std::map<std::string, double> scalars;
  std::map<std::string, bool> verdicts;
  std::vector<Series> traces;
  bool passed() const;
};

struct DissipativityOptions {
  double horizon = 100.0;
  double ball_margin = 0.1;
  int stride = 10;
};

/// R_emp = max over members of sup_{t >= horizon/2} |xi(t)|_E; entry time is the
/// first sample inside the ball of radius (1 + ball_margin) R_emp; every sample
/// after entry outside the ball counts as an exit.
ProbeReport dissipativity_probe(const Model& model, const EnsembleSpec& ensemble,
                                const IntegratorConfig& cfg, const DissipativityOptions& opts = {});

struct E1DissipativityOptions {
  double horizon = 100.0;
  double slope_tol = 1e-4;
  int stride = 10;
};

/// Late-time e1 norms; the growth trend is the least-squares slope over the last
/// half of the horizon.
ProbeReport e1_dissipativity_probe(const Model& model, const EnsembleSpec& ensemble,
                                   const IntegratorConfig& cfg, const E1DissipativityOptions& opts = {});

struct LipschitzOptions {
  double horizon = 5.0;
  double tol = 0.01;
  int stride = 10;
};

/// rho(t) = |xi_u(t) - xi_v(t)| / |xi_u(0) - xi_v(0)| and L_emp = sup_t log rho / t
/// shared by all pairs.  Throws InvalidArgument for a pair with zero separation.
ProbeReport lipschitz_probe(const Model& model, const std::vector<StatePair>& pairs,
                            const IntegratorConfig& cfg, const LipschitzOptions& opts = {});

/// Runs the Lipschitz probe on the pairs and again with every separation halved
/// about the base state; reports the largest relative change of rho.
ProbeReport lipschitz_halving_probe(const Model& model, const std::vector<StatePair>& pairs,
                                    const IntegratorConfig& cfg, const LipschitzOptions& opts = {});

struct AttractorOptions {
  double horizon = 200.0;
  std::optional<double> burn_in;  ///< defaults to horizon / 2
  double tail_fraction = 0.1;     ///< verdict window [horizon (1 - f), horizon]
  double velocity_tol = 1e-3;
  double distance_tol = 1e-3;
  double e1_factor = 10.0;
  std::optional<double> seed_delta;
  NewtonOptions newton;  ///< refinement of tail end points
  int stride = 20;
};

/// Forward orbits of the unstable seeds of every equilibrium plus an ensemble.
/// Tail end points are refined by Newton and merged into the equilibrium set
/// before the distance verdicts.  Throws InvalidArgument for an empty set.
ProbeReport attractor_probe(const Model& model, const EquilibriumSet& equilibria,
                            const EnsembleSpec& ensemble, const IntegratorConfig& cfg,
                            const AttractorOptions& opts = {});

/// min{1, sqrt(lambda_1)/2, J0/2}.
double default_gamma0(const Model& model);
/// ln(48 / eta) / gamma0.
double quasistability_horizon(double eta, double gamma0);

struct QuasiStabilityOptions {
  double eta = 0.5;
  std::optional<double> gamma0;
  int batches = 2;
  double batch_ratio = 2.0;
  int stride = 10;
};

/// LHS = |xi_w(T)|_{E1}^2, head = (eta^2/16) |xi_w(0)|_{E1}^2 and
/// tail = int_0^T |xi_w|_E^2 dt for each pair; mu_emp = max(0, max (LHS - head)/tail).
/// Pairs are split into consecutive batches whose mu_emp must agree within
/// batch_ratio.  Throws InvalidArgument for a pair with zero separation.
ProbeReport quasistability_probe(const Model& model, const std::vector<StatePair>& pairs,
                                 const IntegratorConfig& cfg, const QuasiStabilityOptions& opts = {});

struct ConvergenceOptions {
  std::vector<int> modes{8, 16, 32, 64};
  double horizon = 5.0;
};

/// Solves with the model's g, J and forcing (embedded) on each N; distances are
/// energy distances at the horizon between consecutive N on the finer domain.
ProbeReport galerkin_convergence_probe(const Model& model, const ModalState& state0,
                                       const IntegratorConfig& cfg, const ConvergenceOptions& opts = {});

struct LyapunovOptions {
  double horizon = 10.0;
  int stride = 10;
};

/// Phi along each member; the residual scale of a member is a priori, taken from
/// a companion run at step 2 dt as its largest running identity residual / 4.
/// Verdicts: increases and balance errors within 10x that scale.
ProbeReport lyapunov_probe(const Model& model, const EnsembleSpec& ensemble, const IntegratorConfig& cfg,
                           const LyapunovOptions& opts = {});

}  // namespace nlwave
