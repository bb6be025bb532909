#pragma once

#include "nlwave/spectral.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace nlwave {

// ---------------------------------------------------------------------------
// Damping laws J(s), s = |du/dt|^2.

struct ConstantDamping {
  double gamma = 1.0;
};
/// (a + s) / (b + s), 0 < a < b.
struct HyperbolicDamping {
  double a = 1.0;
  double b = 2.0;
};
/// a e^s / (1 + b e^s), 0 < a < b.
struct LogisticDamping {
  double a = 1.0;
  double b = 2.0;
};
/// (sqrt(s) + eps)^p.
struct ShiftedPowerDamping {
  double epsilon = 0.1;
  double p = 2.0;
};
/// s^p; degenerate since J(0) = 0.
struct PurePowerDamping {
  double p = 2.0;
};

struct DampingValue {
  double J = 0.0;
  double Jprime = 0.0;
};

class DampingLaw {
 public:
  using Params = std::variant<ConstantDamping, HyperbolicDamping, LogisticDamping,
                              ShiftedPowerDamping, PurePowerDamping>;

  static DampingLaw constant(double gamma);
  static DampingLaw hyperbolic(double a, double b);
  static DampingLaw logistic(double a, double b);
  static DampingLaw shifted_power(double epsilon, double p);
  static DampingLaw pure_power(double p);

  const Params& params() const noexcept { return params_; }
  std::string kind_name() const;

  /// J(s) and J'(s) in closed form; throws InvalidArgument for s < 0.
  /// J' is +inf at s = 0 where the closed form is singular (shifted and pure
  /// power with exponent below one).
  DampingValue eval(double s) const;
  double J(double s) const { return eval(s).J; }
  double J0() const { return eval(0.0).J; }

  bool is_constant() const noexcept { return std::holds_alternative<ConstantDamping>(params_); }
  bool degenerate() const { return J0() == 0.0; }
  /// Exponent p of the superlinear lower bound s^{p+1} <= J(s) s, or 0 when the
  /// law has no such bound.
  double p_exponent() const;

  static const std::vector<std::string>& kind_names();

 private:
  explicit DampingLaw(Params p) : params_(p) {}
  Params params_;
};

DampingValue eval_damping(const DampingLaw& law, double s);

// ---------------------------------------------------------------------------
// Nonlinearities g with primitive G.

/// The constants kappa_1..kappa_5 and C_g of the growth and structure conditions.
struct StructuralConstants {
  double kappa1 = 1.0;
  double kappa2 = 1.0;
  double kappa3 = 1.0;
  double kappa4 = 1.0;
  double kappa5 = 1.0;
  double C_g = 1.0;
};

/// |s|^{q-1} s with q in {3, 5}.
struct OddPower {
  int q = 5;
};
/// |s|^{q-1} s - a s with q in {3, 5}, a > 0.
struct Bistable {
  int q = 5;
  double a = 1.0;
};
/// sum_i c_i s^{2i+1}, degree 3 or 5.
struct CustomOddPolynomial {
  std::vector<double> coefficients;
};

struct NonlinearityValue {
  double g = 0.0;
  double gprime = 0.0;
  double gsecond = 0.0;
  double G = 0.0;
};

class Nonlinearity {
 public:
  using Params = std::variant<OddPower, Bistable, CustomOddPolynomial>;

  static Nonlinearity odd_power(int q);
  static Nonlinearity bistable(int q, double a);
  /// Custom polynomials must supply their structural constants.
  static Nonlinearity custom(std::vector<double> odd_coefficients, StructuralConstants constants);

  const Params& params() const noexcept { return params_; }
  std::string kind_name() const;
  /// Growth exponent q.
  int q() const;
  bool is_builtin() const noexcept { return !std::holds_alternative<CustomOddPolynomial>(params_); }

  NonlinearityValue eval(double s) const;
  double g(double s) const;
  double gprime(double s) const;
  double G(double s) const;

  const StructuralConstants& constants() const noexcept { return constants_; }
  /// Replace the constants used by the assumption checker.
  Nonlinearity with_constants(const StructuralConstants& c) const;

  static const std::vector<std::string>& kind_names();

 private:
  Nonlinearity(Params p, StructuralConstants c) : params_(std::move(p)), constants_(c) {}
  Params params_;
  StructuralConstants constants_;
};

NonlinearityValue eval_nonlinearity(const Nonlinearity& nl, double s);

/// Conservative constants valid on all of R for the built-in kinds; throws
/// InvalidArgument for custom polynomials.
StructuralConstants certified_constants(const Nonlinearity& nl);

// ---------------------------------------------------------------------------

/// The full right-hand side data of the damped wave problem on a domain.
struct Model {
  SpectralDomain domain;
  DampingLaw damping;
  Nonlinearity nonlinearity;
  Field forcing;

  static Model make(SpectralDomain domain, DampingLaw damping, Nonlinearity nl,
                    std::optional<Field> forcing = std::nullopt);
};

/// P_N g(u) by pointwise evaluation on the padded grid.
Field apply_nonlinearity(const Model& model, const Field& u);
/// P_N (g'(u_grid) * w) for a grid-valued g'(u).
Field apply_linearized(const SpectralDomain& domain, const GridValues& gprime_on_grid, const Field& w);
GridValues nonlinearity_derivative_on_grid(const Model& model, const Field& u);
/// <G(u), 1> by grid quadrature.
double potential_integral(const Model& model, const Field& u);

// ---------------------------------------------------------------------------

/// Pointwise scan of the structural assumptions.
struct AssumptionReport {
  double s_max = 0.0;
  int samples = 0;

  bool monotone_ok = false;
  bool monotone_bypassed = false;  ///< constant damping admitted without strict monotonicity
  bool positivity_ok = false;      ///< J(s) > 0
  bool superlinear_ok = false;     ///< s^{p+1} <= J(s) s
  bool superlinear_applicable = false;
  double p_exponent = 0.0;
  bool g_zero_ok = false;          ///< g(0) = 0
  bool g_growth_ok = false;        ///< |g''| bound and g' lower bound
  bool g_structure_ok = false;     ///< g s - 4G and G lower bounds
  bool degenerate_flag = false;    ///< J(0) = 0

  double monotone_margin = 0.0;
  double positivity_margin = 0.0;
  double superlinear_margin = 0.0;
  double g_second_margin = 0.0;
  double g_prime_margin = 0.0;
  double g_structure_margin = 0.0;
  double G_lower_margin = 0.0;

  /// Damping condition: monotone (or bypassed) and one of positivity / superlinear.
  bool damping_ok() const;
  bool nonlinearity_ok() const { return g_zero_ok && g_growth_ok && g_structure_ok; }
  bool all_ok() const { return damping_ok() && nonlinearity_ok(); }
};

AssumptionReport check_assumptions(const DampingLaw& law, const Nonlinearity& nl,
                                   double s_max = 1e3, int samples = 2000);

}  // namespace nlwave
