#pragma once

#include "nlwave/model.hpp"
#include "nlwave/spectral.hpp"

#include <complex>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace nlwave {

/// Spectrum of d/dt (w, w') = (w', -(Lambda + P g'(u*)) w - J0 w') at an equilibrium.
struct EigenData {
  std::vector<std::complex<double>> eigenvalues;
  /// Columns are (w, w') with unit energy norm, one per eigenvalue.
  Eigen::MatrixXcd eigenvectors;
  int morse_index = 0;   ///< #{Re mu > 1e-10}
  int center_count = 0;  ///< #{|Re mu| <= 1e-10}
  double damping = 0.0;  ///< J0 used for the linearization
};

struct Equilibrium {
  Field u_star;
  double residual = 0.0;  ///< |Lambda u + P g(u) - P h|_{H^{-1}}
  std::vector<double> residual_history;
  int newton_steps = 0;
  int morse_index = 0;
  std::optional<EigenData> eigen_data;
};

struct EquilibriumSet {
  std::vector<Equilibrium> members;
  int failed_starts = 0;
};

struct NewtonOptions {
  double tol = 1e-12;  ///< on the H^{-1} residual, relative to max(1, |u|_{H^1})
  int max_steps = 50;
};

/// H^{-1} norm of Lambda u + P g(u) - P h.
double stationary_residual(const Model& model, const Field& u);

/// Newton with backtracking line search; inner MINRES on the symmetric Jacobian
/// Lambda + P g'(u), scaled by Lambda^{-1/2}.  Fills the linearization when the
/// damping is non-degenerate.
Equilibrium solve_equilibrium(const Model& model, const Field& guess, const NewtonOptions& opts = {});

/// Largest r_{k+1} / r_k^2 over consecutive residuals below 1e-3 that sit above
/// the round-off floor; 0 when no such pair exists.
double quadratic_convergence_constant(const std::vector<double>& residuals, double floor = 1e-13);

struct MultistartOptions {
  int count = 16;  ///< random starts
  double amplitude_min = 0.5;
  double amplitude_max = 3.0;
  std::uint64_t seed = 1;
  int structured_modes = 4;  ///< +-c e_k guesses along the lowest modes
  double dedup_tol = 1e-6;
  NewtonOptions newton;
};

/// Deduplicated equilibria from structured and random starts; deterministic under
/// a fixed seed.  Members are ordered by H^1 norm, then by coefficients.
EquilibriumSet find_equilibria(const Model& model, const MultistartOptions& opts = {});

/// Adds an equilibrium unless one within `dedup_tol` (energy distance) exists.
bool insert_unique(EquilibriumSet& set, const SpectralDomain& domain, Equilibrium eq,
                   double dedup_tol = 1e-6);

/// Throws DegenerateDamping when J(0) = 0.
EigenData linearize(const Equilibrium& eq, const Model& model);

/// (u* +- delta Re w, +- delta Re w') for every unstable eigenpair; delta defaults
/// to 1e-4 max(1, |u*|_{H^1}).  Throws NoUnstableDirections for index 0.
std::vector<ModalState> unstable_seeds(const Equilibrium& eq, const Model& model,
                                       std::optional<double> delta = std::nullopt);

/// Minimal energy distance from (u, v) to {(u*, 0)}.
double distance_to_set(const SpectralDomain& domain, const ModalState& state, const EquilibriumSet& set);

}  // namespace nlwave
