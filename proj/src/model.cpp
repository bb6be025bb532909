#include "nlwave/model.hpp"

#include "nlwave/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nlwave {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidArgument(msg);
}

// d/ds of s^p at s >= 0.
double power_derivative(double s, double p) {
  if (s > 0.0) return p * std::pow(s, p - 1.0);
  if (p > 1.0) return 0.0;
  if (p == 1.0) return 1.0;
  return kInf;
}

}  // namespace

// ---------------------------------------------------------------------------

DampingLaw DampingLaw::constant(double gamma) {
  require(std::isfinite(gamma) && gamma > 0.0, "constant damping requires gamma > 0");
  return DampingLaw(ConstantDamping{gamma});
}

DampingLaw DampingLaw::hyperbolic(double a, double b) {
  require(std::isfinite(a) && std::isfinite(b) && 0.0 < a && a < b,
          "hyperbolic damping requires 0 < a < b");
  return DampingLaw(HyperbolicDamping{a, b});
}

DampingLaw DampingLaw::logistic(double a, double b) {
  require(std::isfinite(a) && std::isfinite(b) && 0.0 < a && a < b,
          "logistic damping requires 0 < a < b");
  return DampingLaw(LogisticDamping{a, b});
}

DampingLaw DampingLaw::shifted_power(double epsilon, double p) {
  require(std::isfinite(epsilon) && epsilon > 0.0, "shifted_power damping requires epsilon > 0");
  require(std::isfinite(p) && p > 0.0, "shifted_power damping requires p > 0");
  return DampingLaw(ShiftedPowerDamping{epsilon, p});
}

DampingLaw DampingLaw::pure_power(double p) {
  require(std::isfinite(p) && p > 0.0, "pure_power damping requires p > 0");
  return DampingLaw(PurePowerDamping{p});
}

const std::vector<std::string>& DampingLaw::kind_names() {
  static const std::vector<std::string> names{"constant", "hyperbolic", "logistic", "shifted_power",
                                              "pure_power"};
  return names;
}

std::string DampingLaw::kind_name() const { return kind_names()[params_.index()]; }

DampingValue DampingLaw::eval(double s) const {
  if (!(s >= 0.0)) throw InvalidArgument("damping law evaluated at negative argument");
  return std::visit(
      Overloaded{
          [](const ConstantDamping& c) { return DampingValue{c.gamma, 0.0}; },
          [s](const HyperbolicDamping& h) {
            const double den = h.b + s;
            return DampingValue{(h.a + s) / den, (h.b - h.a) / (den * den)};
          },
          [s](const LogisticDamping& l) {
            // a e^s / (1 + b e^s) = a / (e^{-s} + b)
            const double e = std::exp(-s);
            const double den = e + l.b;
            return DampingValue{l.a / den, l.a * e / (den * den)};
          },
          [s](const ShiftedPowerDamping& sp) {
            const double r = std::sqrt(s);
            const double J = std::pow(r + sp.epsilon, sp.p);
            const double dJ =
                r > 0.0 ? sp.p * std::pow(r + sp.epsilon, sp.p - 1.0) / (2.0 * r) : kInf;
            return DampingValue{J, dJ};
          },
          [s](const PurePowerDamping& pp) {
            return DampingValue{std::pow(s, pp.p), power_derivative(s, pp.p)};
          },
      },
      params_);
}

double DampingLaw::p_exponent() const {
  return std::visit(Overloaded{
                        [](const ShiftedPowerDamping& sp) { return sp.p / 2.0; },
                        [](const PurePowerDamping& pp) { return pp.p; },
                        [](const auto&) { return 0.0; },
                    },
                    params_);
}

DampingValue eval_damping(const DampingLaw& law, double s) { return law.eval(s); }

// ---------------------------------------------------------------------------

namespace {

int validated_q(int q) {
  require(q == 3 || q == 5, "built-in nonlinearities require q = 3 or q = 5");
  return q;
}

int custom_degree(const std::vector<double>& c) {
  int last = -1;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c[i] != 0.0) last = static_cast<int>(i);
  return 2 * last + 1;
}

}  // namespace

Nonlinearity Nonlinearity::odd_power(int q) {
  OddPower p{validated_q(q)};
  Nonlinearity nl(p, {});
  nl.constants_ = certified_constants(nl);
  return nl;
}

Nonlinearity Nonlinearity::bistable(int q, double a) {
  require(std::isfinite(a) && a > 0.0, "bistable nonlinearity requires a > 0");
  Nonlinearity nl(Bistable{validated_q(q), a}, {});
  nl.constants_ = certified_constants(nl);
  return nl;
}

Nonlinearity Nonlinearity::custom(std::vector<double> odd_coefficients, StructuralConstants c) {
  for (double x : odd_coefficients) require(std::isfinite(x), "custom coefficients must be finite");
  const int degree = custom_degree(odd_coefficients);
  require(degree == 3 || degree == 5, "custom odd polynomial must have degree 3 or 5");
  require(odd_coefficients[static_cast<std::size_t>(degree / 2)] > 0.0,
          "custom odd polynomial must have a positive leading coefficient");
  odd_coefficients.resize(static_cast<std::size_t>(degree / 2 + 1));
  return Nonlinearity(CustomOddPolynomial{std::move(odd_coefficients)}, c);
}

const std::vector<std::string>& Nonlinearity::kind_names() {
  static const std::vector<std::string> names{"odd_power", "bistable", "custom_odd_polynomial"};
  return names;
}

std::string Nonlinearity::kind_name() const { return kind_names()[params_.index()]; }

int Nonlinearity::q() const {
  return std::visit(Overloaded{
                        [](const OddPower& o) { return o.q; },
                        [](const Bistable& b) { return b.q; },
                        [](const CustomOddPolynomial& c) { return custom_degree(c.coefficients); },
                    },
                    params_);
}

namespace {

// s^q and its derivatives / primitive for odd integer q.
NonlinearityValue monomial(int q, double s) {
  const double s2 = s * s;
  if (q == 3) return {s2 * s, 3.0 * s2, 6.0 * s, s2 * s2 / 4.0};
  const double s4 = s2 * s2;
  return {s4 * s, 5.0 * s4, 20.0 * s2 * s, s4 * s2 / 6.0};
}

}  // namespace

NonlinearityValue Nonlinearity::eval(double s) const {
  return std::visit(Overloaded{
                        [s](const OddPower& o) { return monomial(o.q, s); },
                        [s](const Bistable& b) {
                          auto v = monomial(b.q, s);
                          v.g -= b.a * s;
                          v.gprime -= b.a;
                          v.G -= 0.5 * b.a * s * s;
                          return v;
                        },
                        [s](const CustomOddPolynomial& c) {
                          NonlinearityValue v;
                          for (std::size_t i = 0; i < c.coefficients.size(); ++i) {
                            const double ci = c.coefficients[i];
                            const int n = static_cast<int>(2 * i + 1);
                            v.g += ci * std::pow(s, n);
                            v.gprime += ci * n * std::pow(s, n - 1);
                            if (n >= 2) v.gsecond += ci * n * (n - 1) * std::pow(s, n - 2);
                            v.G += ci * std::pow(s, n + 1) / (n + 1);
                          }
                          return v;
                        },
                    },
                    params_);
}

double Nonlinearity::g(double s) const { return eval(s).g; }
double Nonlinearity::gprime(double s) const { return eval(s).gprime; }
double Nonlinearity::G(double s) const { return eval(s).G; }

Nonlinearity Nonlinearity::with_constants(const StructuralConstants& c) const {
  Nonlinearity out = *this;
  out.constants_ = c;
  return out;
}

NonlinearityValue eval_nonlinearity(const Nonlinearity& nl, double s) { return nl.eval(s); }

StructuralConstants certified_constants(const Nonlinearity& nl) {
  return std::visit(
      Overloaded{
          [](const OddPower& o) {
            const double q = o.q;
            // g s - 4G = (1 - 4/(q+1)) s^{q+1} >= 0 and G = s^{q+1}/(q+1).
            return StructuralConstants{1.0, q, 1.0, 1.0 / (q + 1.0), 1.0, q * (q - 1.0)};
          },
          [](const Bistable& b) {
            const double q = b.q;
            // G = s^{q+1}/(q+1) - a s^2/2 >= s^{q+1}/(2(q+1)) - kappa5 where kappa5 bounds
            // max_x [a x/2 - x^{(q+1)/2}/(2(q+1))], attained at x = (2a)^{2/(q-1)}.
            const double x_star = std::pow(2.0 * b.a, 2.0 / (q - 1.0));
            const double worst = b.a * x_star * (q - 1.0) / (2.0 * (q + 1.0));
            return StructuralConstants{std::max(1.0, b.a), q, 1.0, 1.0 / (2.0 * (q + 1.0)),
                                       std::max(1.0, worst * (1.0 + 1e-6)), q * (q - 1.0)};
          },
          [](const CustomOddPolynomial&) -> StructuralConstants {
            throw InvalidArgument(
                "certified_constants: custom nonlinearities must supply their own constants");
          },
      },
      nl.params());
}

// ---------------------------------------------------------------------------

Model Model::make(SpectralDomain domain, DampingLaw damping, Nonlinearity nl,
                  std::optional<Field> forcing) {
  Field h = forcing ? std::move(*forcing) : domain.zero_field();
  if (static_cast<std::size_t>(h.size()) != domain.num_modes())
    throw InvalidArgument("forcing size does not match the domain");
  if (!h.allFinite()) throw InvalidArgument("forcing must be finite");
  return Model{std::move(domain), damping, std::move(nl), std::move(h)};
}

Field apply_nonlinearity(const Model& model, const Field& u) {
  GridValues grid = model.domain.to_grid(u);
  const auto& nl = model.nonlinearity;
  for (Eigen::Index j = 0; j < grid.size(); ++j) grid[j] = nl.g(grid[j]);
  return model.domain.from_grid(grid);
}

GridValues nonlinearity_derivative_on_grid(const Model& model, const Field& u) {
  GridValues grid = model.domain.to_grid(u);
  const auto& nl = model.nonlinearity;
  for (Eigen::Index j = 0; j < grid.size(); ++j) grid[j] = nl.gprime(grid[j]);
  return grid;
}

Field apply_linearized(const SpectralDomain& domain, const GridValues& gprime_on_grid,
                       const Field& w) {
  GridValues grid = domain.to_grid(w);
  grid.array() *= gprime_on_grid.array();
  return domain.from_grid(grid);
}

double potential_integral(const Model& model, const Field& u) {
  const GridValues grid = model.domain.to_grid(u);
  const auto& nl = model.nonlinearity;
  double sum = 0.0;
  for (Eigen::Index j = 0; j < grid.size(); ++j) sum += nl.G(grid[j]);
  return sum * model.domain.quadrature_weight();
}

// ---------------------------------------------------------------------------

bool AssumptionReport::damping_ok() const {
  return (monotone_ok || monotone_bypassed) && (positivity_ok || superlinear_ok);
}

namespace {

constexpr double kMarginTol = 1e-12;

// Relative slack of lhs <= rhs.  Slack within round-off of an identity is
// reported as exactly zero.
double slack(double lhs, double rhs) {
  const double m = (rhs - lhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)});
  return std::abs(m) <= kMarginTol ? 0.0 : m;
}

std::vector<double> log_spaced(double s_max, int samples) {
  std::vector<double> s;
  s.reserve(static_cast<std::size_t>(samples));
  s.push_back(0.0);
  const double lo = std::log(s_max * 1e-8);
  const double hi = std::log(s_max);
  for (int i = 0; i < samples - 1; ++i)
    s.push_back(std::exp(lo + (hi - lo) * i / std::max(1, samples - 2)));
  s.back() = s_max;
  return s;
}

}  // namespace

AssumptionReport check_assumptions(const DampingLaw& law, const Nonlinearity& nl, double s_max,
                                   int samples) {
  if (!(s_max > 0.0)) throw InvalidArgument("check_assumptions requires S_max > 0");
  if (samples < 100) throw InvalidArgument("check_assumptions requires at least 100 samples");

  AssumptionReport r;
  r.s_max = s_max;
  r.samples = samples;
  const auto s = log_spaced(s_max, samples);
  constexpr double eps = std::numeric_limits<double>::epsilon();

  // (J): strict monotonicity where the increment is resolvable in floating point.
  double mono = kInf;
  bool mono_ok = true;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const auto a = law.eval(s[i]);
    const double Jb = law.J(s[i + 1]);
    const double inc = Jb - a.J;
    const double scale = std::max(1.0, std::abs(a.J));
    mono = std::min(mono, inc / scale);
    if (inc < 0.0 || !(a.Jprime >= 0.0)) mono_ok = false;
    const double predicted = a.Jprime * (s[i + 1] - s[i]);
    if (inc == 0.0 && predicted > 8.0 * eps * scale) mono_ok = false;
  }
  r.monotone_margin = mono;
  r.monotone_bypassed = law.is_constant();
  r.monotone_ok = !r.monotone_bypassed && mono_ok;

  double pos = kInf;
  for (double x : s) pos = std::min(pos, law.J(x));
  r.positivity_margin = pos;
  r.positivity_ok = pos > 0.0;

  r.p_exponent = law.p_exponent();
  r.superlinear_applicable = r.p_exponent > 0.0;
  if (r.superlinear_applicable) {
    double sup = kInf;
    for (double x : s) sup = std::min(sup, slack(std::pow(x, r.p_exponent + 1.0), law.J(x) * x));
    r.superlinear_margin = sup;
    r.superlinear_ok = sup >= 0.0;
  } else {
    r.superlinear_margin = 0.0;
    r.superlinear_ok = true;  // vacuous: no superlinear bound claimed
  }
  r.degenerate_flag = law.J0() == 0.0;

  // (GH) on the symmetric scan.
  const auto& k = nl.constants();
  const double q = nl.q();
  double m_second = kInf, m_prime = kInf, m_struct = kInf, m_G = kInf;
  for (double x : s) {
    for (double sx : {x, -x}) {
      const auto v = nl.eval(sx);
      const double ax = std::abs(sx);
      m_second = std::min(m_second, slack(std::abs(v.gsecond), k.C_g * (1.0 + std::pow(ax, q - 2.0))));
      m_prime = std::min(m_prime, slack(-k.kappa1 + k.kappa2 * std::pow(ax, q - 1.0), v.gprime));
      m_struct = std::min(m_struct, slack(-k.kappa3, v.g * sx - 4.0 * v.G));
      m_G = std::min(m_G, slack(k.kappa4 * std::pow(ax, q + 1.0) - k.kappa5, v.G));
    }
  }
  r.g_second_margin = m_second;
  r.g_prime_margin = m_prime;
  r.g_structure_margin = m_struct;
  r.G_lower_margin = m_G;
  r.g_zero_ok = nl.g(0.0) == 0.0 && nl.G(0.0) == 0.0;
  r.g_growth_ok = m_second >= 0.0 && m_prime >= 0.0;
  r.g_structure_ok = m_struct >= 0.0 && m_G >= 0.0;
  return r;
}

}  // namespace nlwave
