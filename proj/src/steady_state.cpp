#include "nlwave/steady_state.hpp"

#include "nlwave/errors.hpp"
#include "nlwave/krylov.hpp"
#include "nlwave/parallel.hpp"
#include "nlwave/random.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nlwave {

namespace {

Field stationary_map(const Model& model, const Field& u) {
  const auto& lam = model.domain.eigenvalues();
  return (lam.array() * u.array()).matrix() + apply_nonlinearity(model, u) - model.forcing;
}

double h_minus_one(const SpectralDomain& d, const Field& r) { return hs_norm(d, r, -1.0); }

}  // namespace

double stationary_residual(const Model& model, const Field& u) {
  return h_minus_one(model.domain, stationary_map(model, u));
}

Equilibrium solve_equilibrium(const Model& model, const Field& guess, const NewtonOptions& opts) {
  const auto& d = model.domain;
  if (static_cast<std::size_t>(guess.size()) != d.num_modes())
    throw InvalidArgument("solve_equilibrium: guess does not match the domain");
  if (!guess.allFinite()) throw InvalidArgument("solve_equilibrium: guess must be finite");

  const Eigen::ArrayXd lam = d.eigenvalues().array();
  const Eigen::ArrayXd isl = lam.rsqrt();
  Equilibrium eq;
  Field u = guess;
  Field r = stationary_map(model, u);
  double rnorm = h_minus_one(d, r);

  for (int k = 0;; ++k) {
    eq.residual_history.push_back(rnorm);
    const double target = opts.tol * std::max(1.0, hs_norm(d, u, 1.0));
    if (rnorm <= target) break;
    if (k >= opts.max_steps)
      throw NewtonDiverged("Newton did not converge in " + std::to_string(opts.max_steps) + " steps");

    const GridValues gp = nonlinearity_derivative_on_grid(model, u);
    const LinearOperator op = [&](const Field& y) -> Field {
      const Field x = (isl * y.array()).matrix();
      return y + (isl * apply_linearized(d, gp, x).array()).matrix();
    };
    Field y;
    const auto kr = minres(op, (-(isl * r.array())).matrix(), y, 1e-14, 1000);
    if (kr.breakdown || !y.allFinite()) throw JacobianSingular("Newton: Jacobian solve broke down");
    const Field delta = (isl * y.array()).matrix();

    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls, alpha *= 0.5) {
      const Field u_try = u + alpha * delta;
      const Field r_try = stationary_map(model, u_try);
      const double n_try = h_minus_one(d, r_try);
      if (std::isfinite(n_try) && n_try < (1.0 - 1e-4 * alpha) * rnorm) {
        u = u_try;
        r = r_try;
        rnorm = n_try;
        accepted = true;
        break;
      }
    }
    ++eq.newton_steps;
    if (!accepted) {
      // Stagnation at round-off level counts as convergence.
      if (rnorm <= 1e3 * target) break;
      throw NewtonDiverged("Newton line search failed to reduce the residual");
    }
  }
  eq.u_star = u;
  eq.residual = rnorm;
  if (!model.damping.degenerate()) {
    eq.eigen_data = linearize(eq, model);
    eq.morse_index = eq.eigen_data->morse_index;
  }
  return eq;
}

double quadratic_convergence_constant(const std::vector<double>& residuals, double floor) {
  double c = 0.0;
  for (std::size_t i = 0; i + 1 < residuals.size(); ++i) {
    const double a = residuals[i];
    const double b = residuals[i + 1];
    if (a < 1e-3 && a > 0.0 && b > floor) c = std::max(c, b / (a * a));
  }
  return c;
}

EigenData linearize(const Equilibrium& eq, const Model& model) {
  const double J0 = model.damping.J0();
  if (J0 == 0.0)
    throw DegenerateDamping("linearize: degenerate damping J(0) = 0 has no hyperbolic linearization");
  const auto& d = model.domain;
  const auto n = static_cast<Eigen::Index>(d.num_modes());

  // Stiffness K = Lambda + P g'(u*), symmetric in the modal basis.
  const GridValues gp = nonlinearity_derivative_on_grid(model, eq.u_star);
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Field e = Field::Zero(n);
    e[j] = 1.0;
    K.col(j) = apply_linearized(d, gp, e);
    K(j, j) += d.eigenvalues()[j];
  }
  K = 0.5 * (K + K.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
  if (es.info() != Eigen::Success) throw Error("linearize: eigen-solver failure");

  // With scalar damping the block system decouples along K's eigenvectors:
  // mu^2 + J0 mu + kappa = 0.
  EigenData ed;
  ed.damping = J0;
  ed.eigenvectors.resize(2 * n, 2 * n);
  const auto& lam = d.eigenvalues();
  Eigen::Index col = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double kappa = es.eigenvalues()[i];
    const Eigen::VectorXd phi = es.eigenvectors().col(i);
    const std::complex<double> disc = std::sqrt(std::complex<double>(J0 * J0 - 4.0 * kappa, 0.0));
    const double h1sq = (lam.array() * phi.array().square()).sum();
    for (double sign : {1.0, -1.0}) {
      const std::complex<double> mu = 0.5 * (-J0 + sign * disc);
      const double scale = 1.0 / std::sqrt(h1sq + std::norm(mu));
      ed.eigenvectors.col(col).head(n) = phi.cast<std::complex<double>>() * scale;
      ed.eigenvectors.col(col).tail(n) = phi.cast<std::complex<double>>() * (mu * scale);
      ed.eigenvalues.push_back(mu);
      if (mu.real() > 1e-10) ++ed.morse_index;
      else if (std::abs(mu.real()) <= 1e-10) ++ed.center_count;
      ++col;
    }
  }
  return ed;
}

std::vector<ModalState> unstable_seeds(const Equilibrium& eq, const Model& model,
                                       std::optional<double> delta) {
  const auto& d = model.domain;
  const EigenData ed = eq.eigen_data ? *eq.eigen_data : linearize(eq, model);
  if (ed.morse_index == 0) throw NoUnstableDirections("equilibrium has no unstable directions");
  const double dl = delta.value_or(1e-4 * std::max(1.0, hs_norm(d, eq.u_star, 1.0)));
  if (!(dl > 0.0)) throw InvalidArgument("unstable_seeds requires delta > 0");
  const auto n = static_cast<Eigen::Index>(d.num_modes());
  std::vector<ModalState> seeds;
  for (std::size_t i = 0; i < ed.eigenvalues.size(); ++i) {
    if (ed.eigenvalues[i].real() <= 1e-10) continue;
    const auto col = ed.eigenvectors.col(static_cast<Eigen::Index>(i));
    Field w = col.head(n).real();
    Field wd = col.tail(n).real();
    ModalState dir{w, wd, 0.0};
    const double nrm = energy_norm(d, dir);
    w /= nrm;
    wd /= nrm;
    seeds.push_back(ModalState{eq.u_star + dl * w, dl * wd, 0.0});
    seeds.push_back(ModalState{eq.u_star - dl * w, -dl * wd, 0.0});
  }
  return seeds;
}

bool insert_unique(EquilibriumSet& set, const SpectralDomain& domain, Equilibrium eq, double dedup_tol) {
  for (const auto& m : set.members)
    if (hs_norm(domain, m.u_star - eq.u_star, 1.0) < dedup_tol) return false;
  set.members.push_back(std::move(eq));
  return true;
}

EquilibriumSet find_equilibria(const Model& model, const MultistartOptions& opts) {
  const auto& d = model.domain;
  if (opts.count < 1) throw InvalidArgument("find_equilibria requires count >= 1");
  if (!(0.0 <= opts.amplitude_min && opts.amplitude_min <= opts.amplitude_max))
    throw InvalidArgument("find_equilibria requires 0 <= amplitude_min <= amplitude_max");

  std::vector<Field> guesses;
  guesses.push_back(d.zero_field());
  std::vector<std::size_t> order(d.num_modes());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return d.eigenvalues()[static_cast<Eigen::Index>(a)] < d.eigenvalues()[static_cast<Eigen::Index>(b)];
  });
  const auto structured = std::min<std::size_t>(static_cast<std::size_t>(std::max(0, opts.structured_modes)),
                                                order.size());
  for (std::size_t i = 0; i < structured; ++i) {
    for (double c : {opts.amplitude_min, opts.amplitude_max}) {
      if (c == 0.0) continue;
      for (double sign : {1.0, -1.0}) {
        Field g = d.zero_field();
        g[static_cast<Eigen::Index>(order[i])] = sign * c;
        guesses.push_back(g);
      }
    }
  }
  SplitMix64 rng(opts.seed);
  for (int i = 0; i < opts.count; ++i) {
    Field g = random_smooth_field(d, rng, 1.0);
    const double amp = rng.uniform(opts.amplitude_min, opts.amplitude_max);
    const double n = g.norm();
    if (n > 0.0) g *= amp / n;
    guesses.push_back(g);
  }

  std::vector<std::optional<Equilibrium>> results(guesses.size());
  parallel_for(guesses.size(), [&](std::size_t i) {
    try {
      results[i] = solve_equilibrium(model, guesses[i], opts.newton);
    } catch (const Error&) {
      results[i].reset();
    }
  });

  EquilibriumSet set;
  for (auto& r : results) {
    if (!r) {
      ++set.failed_starts;
      continue;
    }
    insert_unique(set, d, std::move(*r), opts.dedup_tol);
  }
  std::stable_sort(set.members.begin(), set.members.end(), [&](const Equilibrium& a, const Equilibrium& b) {
    const double na = hs_norm(d, a.u_star, 1.0);
    const double nb = hs_norm(d, b.u_star, 1.0);
    if (std::abs(na - nb) > 1e-9 * std::max(1.0, std::max(na, nb))) return na < nb;
    for (Eigen::Index k = 0; k < a.u_star.size(); ++k)
      if (std::abs(a.u_star[k] - b.u_star[k]) > 1e-9) return a.u_star[k] < b.u_star[k];
    return false;
  });
  return set;
}

double distance_to_set(const SpectralDomain& domain, const ModalState& state, const EquilibriumSet& set) {
  double best = std::numeric_limits<double>::infinity();
  const double vv = state.v.squaredNorm();
  for (const auto& m : set.members) {
    const double du = hs_norm(domain, state.u - m.u_star, 1.0);
    best = std::min(best, std::sqrt(du * du + vv));
  }
  return best;
}

}  // namespace nlwave
