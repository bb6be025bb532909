#pragma once

#include "nlwave/model.hpp"
#include "nlwave/spectral.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nlwave {

enum class Scheme { implicit_midpoint, semi_implicit_exponential };

std::string scheme_name(Scheme s);
Scheme parse_scheme(const std::string& name);

struct IntegratorConfig {
  Scheme scheme = Scheme::implicit_midpoint;
  double dt = 1e-3;
  /// Tolerance of |sigma - J(m(sigma))| relative to 1 + sigma.
  double scalar_tol = 1e-12;
  int scalar_max_iter = 100;
  /// Energy-norm increment tolerance of the nonlinear sweeps, relative to 1 + |xi|.
  double nonlinear_tol = 1e-12;
  int nonlinear_max_sweeps = 50;
  /// Drops g and the nonlocal law; damping is then the constant linear_damping.
  bool linear_test_mode = false;
  double linear_damping = 0.0;
  /// Abort when the energy norm exceeds this factor times the step's reference
  /// scale, (|xi|_E^2 + max(0, 2 <G(u),1>))^{1/2} at the start of the step.
  double growth_guard = 10.0;

  void validate() const;
};

/// sigma -> |v|^2 of the update computed with damping coefficient sigma.
using VelocityNormMap = std::function<double(double)>;

struct ScalarSolveResult {
  double sigma = 0.0;
  int iterations = 0;
  bool used_bisection = false;
};

/// Root of sigma = J(m(sigma)) for non-increasing m; damped fixed point first,
/// bisection on [0, J(m(0))] (expanded if needed) as fallback.
ScalarSolveResult solve_damping_scalar(const VelocityNormMap& m, const DampingLaw& law,
                                       const IntegratorConfig& cfg,
                                       std::optional<double> initial = std::nullopt);

struct StepResult {
  ModalState state;
  double sigma = 0.0;        ///< damping coefficient used over the step
  double dissipation = 0.0;  ///< 2 sigma |v_mid|^2 dt
  int sweeps = 0;
  bool used_newton = false;
};

/// One step of size cfg.dt.
StepResult step(const ModalState& state, const Model& model, const IntegratorConfig& cfg);
/// One step of size dt (overrides cfg.dt).
StepResult step(const ModalState& state, const Model& model, const IntegratorConfig& cfg, double dt);

struct StepView {
  std::size_t step = 0;
  double t = 0.0;
  const ModalState& state;
  double sigma = 0.0;
  double dissipation = 0.0;
};
using Observer = std::function<void(const StepView&)>;

struct Trajectory {
  Model model;
  IntegratorConfig config;
  double dt = 0.0;  ///< step actually used (horizon / steps)
  std::vector<ModalState> states;             ///< samples, first is the initial state
  std::vector<std::size_t> sample_steps;      ///< step index of each sample
  std::vector<double> cumulative_dissipation; ///< D(t) at each sample
  std::vector<double> sigma;                  ///< per step
  std::vector<double> dissipation;            ///< per step

  std::vector<double> times() const;
  std::size_t steps() const noexcept { return sigma.size(); }
};

/// Repeated steps up to the horizon.  The step count is ceil(horizon/dt) and the
/// step is shrunk uniformly to land on the horizon.  Samples are taken every
/// `stride` steps and always at the final step; observers see every sample.
Trajectory integrate(const ModalState& state0, const Model& model, const IntegratorConfig& cfg,
                     double horizon, int stride = 1, std::span<const Observer> observers = {});

/// 4 kappa_1^2 from the model's constants.
double default_parabolic_ell(const Model& model);

struct ParabolicTrajectory {
  std::vector<double> times;
  std::vector<Field> states;
};

/// dz/dt - Laplace z + ell (-Laplace)^{-1} z + g(z) = hhat with the linear part
/// exact per mode and one Newton correction of the implicit g per step.
ParabolicTrajectory parabolic_integrate(const Field& z0, const Model& model, double ell,
                                        const Field& hhat, const IntegratorConfig& cfg,
                                        double horizon, int stride = 1);

}  // namespace nlwave
