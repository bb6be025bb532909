#include "nlwave/experiments.hpp"

#include "nlwave/diagnostics.hpp"
#include "nlwave/errors.hpp"
#include "nlwave/parallel.hpp"
#include "nlwave/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nlwave {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Streams above this offset are reserved for pair partners.
constexpr std::uint64_t kPartnerStream = 1ULL << 32;

std::string indexed(const std::string& prefix, std::size_t i) { return prefix + "_" + std::to_string(i); }

double trapezoid(const std::vector<double>& t, const std::vector<double>& f) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) s += 0.5 * (f[i] + f[i + 1]) * (t[i + 1] - t[i]);
  return s;
}

// Least-squares slope of f against t.
double slope(const std::vector<double>& t, const std::vector<double>& f) {
  const auto n = static_cast<double>(t.size());
  if (t.size() < 2) return 0.0;
  double mt = 0.0, mf = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    mt += t[i];
    mf += f[i];
  }
  mt /= n;
  mf /= n;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    num += (t[i] - mt) * (f[i] - mf);
    den += (t[i] - mt) * (t[i] - mt);
  }
  return den > 0.0 ? num / den : 0.0;
}

std::vector<Trajectory> integrate_all(const std::vector<ModalState>& states, const Model& model,
                                      const IntegratorConfig& cfg, double horizon, int stride) {
  std::vector<std::optional<Trajectory>> out(states.size());
  parallel_for(states.size(), [&](std::size_t i) { out[i] = integrate(states[i], model, cfg, horizon, stride); });
  std::vector<Trajectory> trajs;
  trajs.reserve(out.size());
  for (auto& t : out) trajs.push_back(std::move(*t));
  return trajs;
}

void check_domain(const Model& model, const ModalState& s) {
  const auto n = model.domain.num_modes();
  if (static_cast<std::size_t>(s.u.size()) != n || static_cast<std::size_t>(s.v.size()) != n)
    throw InvalidArgument("state does not match the model domain");
}

double separation(const SpectralDomain& d, const StatePair& p) {
  const double s = energy_distance(d, p.first, p.second);
  if (!(s > 0.0)) throw InvalidArgument("pair has zero initial separation");
  return s;
}

ModalState difference(const ModalState& a, const ModalState& b) { return ModalState{a.u - b.u, a.v - b.v, a.t}; }

}  // namespace

void EnsembleSpec::validate() const {
  if (count < 1) throw InvalidArgument("ensemble count must be >= 1");
  if (!(0.0 <= r_min && r_min <= r_max && std::isfinite(r_max)))
    throw InvalidArgument("ensemble norms require 0 <= r_min <= r_max");
  if (mode_band < 0) throw InvalidArgument("ensemble mode_band must be >= 0");
  if (!std::isfinite(decay)) throw InvalidArgument("ensemble decay must be finite");
}

std::vector<ModalState> ensemble_states(const SpectralDomain& domain, const EnsembleSpec& spec) {
  spec.validate();
  std::vector<ModalState> out;
  out.reserve(static_cast<std::size_t>(spec.count));
  for (int i = 0; i < spec.count; ++i) {
    SplitMix64 rng(spec.seed, static_cast<std::uint64_t>(i));
    const double r = rng.uniform(spec.r_min, spec.r_max);
    out.push_back(random_state(domain, rng, r, spec.decay, spec.mode_band));
  }
  return out;
}

std::vector<StatePair> ensemble_pairs(const SpectralDomain& domain, const EnsembleSpec& spec,
                                      std::optional<double> sep) {
  if (sep && !(*sep > 0.0)) throw InvalidArgument("pair separation must be > 0");
  const auto bases = ensemble_states(domain, spec);
  std::vector<StatePair> out;
  out.reserve(bases.size());
  for (std::size_t i = 0; i < bases.size(); ++i) {
    SplitMix64 rng(spec.seed, kPartnerStream + i);
    ModalState partner;
    if (sep) {
      const ModalState dir = random_state(domain, rng, 1.0, spec.decay, spec.mode_band);
      partner = ModalState{bases[i].u + *sep * dir.u, bases[i].v + *sep * dir.v, 0.0};
    } else {
      const double r = rng.uniform(spec.r_min, spec.r_max);
      partner = random_state(domain, rng, r, spec.decay, spec.mode_band);
    }
    out.emplace_back(bases[i], std::move(partner));
  }
  return out;
}

bool ProbeReport::passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const auto& kv) { return kv.second; });
}

// ---------------------------------------------------------------------------

ProbeReport dissipativity_probe(const Model& model, const EnsembleSpec& ensemble, const IntegratorConfig& cfg,
                                const DissipativityOptions& opts) {
  if (!(opts.horizon > 0.0)) throw InvalidArgument("dissipativity_probe requires horizon > 0");
  if (!(opts.ball_margin >= 0.0)) throw InvalidArgument("ball_margin must be >= 0");
  const auto& d = model.domain;
  const auto trajs = integrate_all(ensemble_states(d, ensemble), model, cfg, opts.horizon, opts.stride);

  ProbeReport rep;
  rep.name = "dissipativity";
  std::vector<NormTrace> norms;
  double R = 0.0;
  for (const auto& tr : trajs) {
    norms.push_back(energy_norm_trace(tr));
    const auto& nt = norms.back();
    for (std::size_t i = 0; i < nt.times.size(); ++i)
      if (nt.times[i] >= 0.5 * opts.horizon - 1e-9) R = std::max(R, nt.values[i]);
  }
  const double radius = (1.0 + opts.ball_margin) * R;
  double max_entry = 0.0;
  int exits = 0;
  double initial_max = 0.0;
  for (std::size_t k = 0; k < norms.size(); ++k) {
    const auto& nt = norms[k];
    initial_max = std::max(initial_max, nt.values.front());
    double entry = kInf;
    int member_exits = 0;
    for (std::size_t i = 0; i < nt.times.size(); ++i) {
      if (entry == kInf) {
        if (nt.values[i] <= radius) entry = nt.times[i];
      } else if (nt.values[i] > radius) {
        ++member_exits;
      }
    }
    exits += member_exits;
    max_entry = std::max(max_entry, entry);
    rep.scalars[indexed("entry_time", k)] = entry;
    rep.traces.push_back(Series{indexed("member", k), {"t", "energy_norm"}, {"time", "energy"}, {nt.times, nt.values}});
  }
  rep.scalars["R_emp"] = R;
  rep.scalars["ball_radius"] = radius;
  rep.scalars["max_entry_time"] = max_entry;
  rep.scalars["exit_count"] = exits;
  rep.scalars["initial_norm_max"] = initial_max;
  rep.scalars["members"] = static_cast<double>(trajs.size());
  rep.verdicts["all_entered"] = std::isfinite(max_entry);
  rep.verdicts["positively_invariant"] = exits == 0;
  return rep;
}

ProbeReport e1_dissipativity_probe(const Model& model, const EnsembleSpec& ensemble, const IntegratorConfig& cfg,
                                   const E1DissipativityOptions& opts) {
  if (!(opts.horizon > 0.0)) throw InvalidArgument("e1_dissipativity_probe requires horizon > 0");
  const auto& d = model.domain;
  const auto trajs = integrate_all(ensemble_states(d, ensemble), model, cfg, opts.horizon, opts.stride);

  ProbeReport rep;
  rep.name = "e1_dissipativity";
  double R1 = 0.0, max_slope = -kInf, sup_all = 0.0, initial_max = 0.0;
  bool finite = true;
  for (std::size_t k = 0; k < trajs.size(); ++k) {
    const auto nt = e1_norm_trace(trajs[k]);
    std::vector<double> lt, lv;
    for (std::size_t i = 0; i < nt.times.size(); ++i) {
      finite = finite && std::isfinite(nt.values[i]);
      sup_all = std::max(sup_all, nt.values[i]);
      if (nt.times[i] >= 0.5 * opts.horizon - 1e-9) {
        lt.push_back(nt.times[i]);
        lv.push_back(nt.values[i]);
        R1 = std::max(R1, nt.values[i]);
      }
    }
    initial_max = std::max(initial_max, nt.values.front());
    const double s = slope(lt, lv);
    max_slope = std::max(max_slope, s);
    rep.scalars[indexed("late_slope", k)] = s;
    rep.traces.push_back(Series{indexed("member", k), {"t", "e1_norm"}, {"time", "e1"}, {nt.times, nt.values}});
  }
  rep.scalars["R1_emp"] = R1;
  rep.scalars["max_late_slope"] = max_slope;
  rep.scalars["sup_e1_norm"] = sup_all;
  rep.scalars["initial_e1_max"] = initial_max;
  rep.verdicts["bounded"] = finite;
  rep.verdicts["no_growth_trend"] = max_slope <= opts.slope_tol;
  return rep;
}

// ---------------------------------------------------------------------------

namespace {

struct RhoTrace {
  std::vector<double> t, rho;
};

std::vector<RhoTrace> rho_traces(const Model& model, const std::vector<StatePair>& pairs, const IntegratorConfig& cfg,
                                 double horizon, int stride) {
  const auto& d = model.domain;
  std::vector<double> sep(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    check_domain(model, pairs[i].first);
    check_domain(model, pairs[i].second);
    sep[i] = separation(d, pairs[i]);
  }
  std::vector<RhoTrace> out(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    const auto a = integrate(pairs[i].first, model, cfg, horizon, stride);
    const auto b = integrate(pairs[i].second, model, cfg, horizon, stride);
    for (std::size_t k = 0; k < a.states.size(); ++k) {
      out[i].t.push_back(a.states[k].t);
      out[i].rho.push_back(energy_distance(d, a.states[k], b.states[k]) / sep[i]);
    }
  });
  return out;
}

}  // namespace

ProbeReport lipschitz_probe(const Model& model, const std::vector<StatePair>& pairs, const IntegratorConfig& cfg,
                            const LipschitzOptions& opts) {
  if (pairs.empty()) throw InvalidArgument("lipschitz_probe requires at least one pair");
  const auto traces = rho_traces(model, pairs, cfg, opts.horizon, opts.stride);
  ProbeReport rep;
  rep.name = "lipschitz";
  double L = -kInf;
  for (const auto& tr : traces)
    for (std::size_t k = 0; k < tr.t.size(); ++k)
      if (tr.t[k] > 0.0) L = std::max(L, std::log(tr.rho[k]) / tr.t[k]);
  if (!std::isfinite(L)) L = 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto& tr = traces[i];
    for (std::size_t k = 0; k < tr.t.size(); ++k) worst = std::max(worst, tr.rho[k] / std::exp(L * tr.t[k]));
    rep.traces.push_back(Series{indexed("pair", i), {"t", "rho"}, {"time", "1"}, {tr.t, tr.rho}});
  }
  rep.scalars["L_emp"] = L;
  rep.scalars["max_rho_over_bound"] = worst;
  rep.scalars["pairs"] = static_cast<double>(pairs.size());
  rep.verdicts["finite_L"] = std::isfinite(L);
  rep.verdicts["shared_bound"] = worst <= 1.0 + opts.tol;
  return rep;
}

ProbeReport lipschitz_halving_probe(const Model& model, const std::vector<StatePair>& pairs,
                                    const IntegratorConfig& cfg, const LipschitzOptions& opts) {
  ProbeReport rep = lipschitz_probe(model, pairs, cfg, opts);
  std::vector<StatePair> halved;
  halved.reserve(pairs.size());
  for (const auto& p : pairs)
    halved.emplace_back(p.first, ModalState{0.5 * (p.first.u + p.second.u), 0.5 * (p.first.v + p.second.v), 0.0});
  const ProbeReport half = lipschitz_probe(model, halved, cfg, opts);
  double change = 0.0;
  for (std::size_t i = 0; i < rep.traces.size(); ++i) {
    const auto& a = rep.traces[i].data[1];
    const auto& b = half.traces[i].data[1];
    for (std::size_t k = 0; k < a.size(); ++k) change = std::max(change, std::abs(b[k] / a[k] - 1.0));
  }
  rep.name = "lipschitz_halving";
  rep.scalars["L_emp_halved"] = half.scalars.at("L_emp");
  rep.scalars["max_relative_change"] = change;
  rep.verdicts["halved_shared_bound"] = half.verdicts.at("shared_bound");
  rep.verdicts["first_order_regime"] = change <= opts.tol;
  return rep;
}

// ---------------------------------------------------------------------------

ProbeReport attractor_probe(const Model& model, const EquilibriumSet& equilibria, const EnsembleSpec& ensemble,
                            const IntegratorConfig& cfg, const AttractorOptions& opts) {
  if (equilibria.members.empty()) throw InvalidArgument("attractor_probe requires at least one equilibrium");
  if (!(opts.horizon > 0.0)) throw InvalidArgument("attractor_probe requires horizon > 0");
  const auto& d = model.domain;
  const double burn_in = opts.burn_in.value_or(0.5 * opts.horizon);
  const double tail_start = opts.horizon * (1.0 - opts.tail_fraction);

  std::vector<ModalState> starts;
  std::vector<std::string> labels;
  for (std::size_t e = 0; e < equilibria.members.size(); ++e) {
    if (equilibria.members[e].morse_index == 0) continue;
    const auto seeds = unstable_seeds(equilibria.members[e], model, opts.seed_delta);
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      starts.push_back(seeds[s]);
      labels.push_back("seed_" + std::to_string(e) + "_" + std::to_string(s));
    }
  }
  const std::size_t seed_count = starts.size();
  for (auto& s : ensemble_states(d, ensemble)) {
    labels.push_back(indexed("ensemble", starts.size() - seed_count));
    starts.push_back(std::move(s));
  }
  const auto trajs = integrate_all(starts, model, cfg, opts.horizon, opts.stride);

  // Tail end points refined by Newton complete the computed stationary set.
  EquilibriumSet set = equilibria;
  int added = 0;
  for (const auto& tr : trajs) {
    try {
      if (insert_unique(set, d, solve_equilibrium(model, tr.states.back().u, opts.newton))) ++added;
    } catch (const Error&) {
    }
  }
  double e1_eq = 0.0;
  for (const auto& m : set.members) e1_eq = std::max(e1_eq, hs_norm(d, m.u_star, 2.0));

  ProbeReport rep;
  rep.name = "attractor";
  double tail_vel = 0.0, tail_dist = 0.0, tail_e1 = 0.0, final_dist = 0.0;
  bool phi_ok = true;
  int seed_arrivals = 0;
  for (std::size_t k = 0; k < trajs.size(); ++k) {
    const auto& tr = trajs[k];
    const auto lt = lyapunov_trace(tr);
    phi_ok = phi_ok && lt.non_increasing;
    std::vector<double> t, dist, vel, e1, phi;
    for (std::size_t i = 0; i < tr.states.size(); ++i) {
      const auto& s = tr.states[i];
      if (s.t < burn_in - 1e-9) continue;
      t.push_back(s.t);
      dist.push_back(distance_to_set(d, s, set));
      vel.push_back(negative_norm_velocity(d, s, 1.0));
      e1.push_back(e1_norm(d, s));
      phi.push_back(lt.phi[i]);
      if (s.t >= tail_start - 1e-9) {
        tail_vel = std::max(tail_vel, vel.back());
        tail_dist = std::max(tail_dist, dist.back());
        tail_e1 = std::max(tail_e1, e1.back());
      }
    }
    final_dist = std::max(final_dist, dist.back());
    if (k < seed_count && dist.back() <= opts.distance_tol) ++seed_arrivals;
    rep.traces.push_back(Series{labels[k],
                                {"t", "dist_to_equilibria", "velocity_h_minus_1", "e1_norm", "phi"},
                                {"time", "energy", "h-1", "e1", "energy"},
                                {t, dist, vel, e1, phi}});
  }
  rep.scalars["equilibria_initial"] = static_cast<double>(equilibria.members.size());
  rep.scalars["equilibria_added"] = added;
  rep.scalars["unstable_seeds"] = static_cast<double>(seed_count);
  rep.scalars["seed_arrivals"] = seed_arrivals;
  rep.scalars["trajectories"] = static_cast<double>(trajs.size());
  rep.scalars["tail_start"] = tail_start;
  rep.scalars["tail_max_velocity_h_minus_1"] = tail_vel;
  rep.scalars["tail_max_distance"] = tail_dist;
  rep.scalars["final_max_distance"] = final_dist;
  rep.scalars["tail_max_e1_norm"] = tail_e1;
  rep.scalars["equilibria_max_e1_norm"] = e1_eq;
  rep.verdicts["velocity_decay"] = tail_vel <= opts.velocity_tol;
  rep.verdicts["distance_decay"] = tail_dist <= opts.distance_tol;
  rep.verdicts["e1_bounded"] = tail_e1 <= opts.e1_factor * std::max(e1_eq, 1e-12) || tail_e1 == 0.0;
  rep.verdicts["lyapunov_non_increasing"] = phi_ok;
  return rep;
}

// ---------------------------------------------------------------------------

double default_gamma0(const Model& model) {
  return std::min({1.0, 0.5 * std::sqrt(model.domain.lambda1()), 0.5 * model.damping.J0()});
}

double quasistability_horizon(double eta, double gamma0) {
  if (!(eta > 0.0 && eta < 1.0)) throw InvalidArgument("eta must lie in (0, 1)");
  if (!(gamma0 > 0.0)) throw InvalidArgument("gamma0 must be > 0 (degenerate damping has none)");
  return std::log(48.0 / eta) / gamma0;
}

ProbeReport quasistability_probe(const Model& model, const std::vector<StatePair>& pairs,
                                 const IntegratorConfig& cfg, const QuasiStabilityOptions& opts) {
  if (pairs.empty()) throw InvalidArgument("quasistability_probe requires at least one pair");
  if (opts.batches < 1 || static_cast<std::size_t>(opts.batches) > pairs.size())
    throw InvalidArgument("quasistability_probe: batches must lie in [1, pairs]");
  const auto& d = model.domain;
  const double gamma0 = opts.gamma0.value_or(cfg.linear_test_mode ? std::min({1.0, 0.5 * std::sqrt(d.lambda1()),
                                                                             0.5 * cfg.linear_damping})
                                                                   : default_gamma0(model));
  const double T = quasistability_horizon(opts.eta, gamma0);
  for (const auto& p : pairs) {
    check_domain(model, p.first);
    check_domain(model, p.second);
    separation(d, p);
  }

  const std::size_t n = pairs.size();
  std::vector<double> lhs(n), head(n), tail(n), ratio(n);
  parallel_for(n, [&](std::size_t i) {
    const auto a = integrate(pairs[i].first, model, cfg, T, opts.stride);
    const auto b = integrate(pairs[i].second, model, cfg, T, opts.stride);
    std::vector<double> t, e;
    for (std::size_t k = 0; k < a.states.size(); ++k) {
      t.push_back(a.states[k].t);
      const double en = energy_norm(d, difference(a.states[k], b.states[k]));
      e.push_back(en * en);
    }
    const double e1_T = e1_norm(d, difference(a.states.back(), b.states.back()));
    const double e1_0 = e1_norm(d, difference(pairs[i].first, pairs[i].second));
    lhs[i] = e1_T * e1_T;
    head[i] = opts.eta * opts.eta / 16.0 * e1_0 * e1_0;
    tail[i] = trapezoid(t, e);
    ratio[i] = (lhs[i] - head[i]) / tail[i];
  });

  ProbeReport rep;
  rep.name = "quasistability";
  std::vector<double> batch_mu(static_cast<std::size_t>(opts.batches), 0.0);
  std::vector<double> col_pair, col_batch;
  double mu = 0.0;
  bool finite = true;
  bool head_sufficient = true;
  for (std::size_t i = 0; i < n; ++i) {
    const auto b = i * static_cast<std::size_t>(opts.batches) / n;
    finite = finite && std::isfinite(ratio[i]);
    batch_mu[b] = std::max(batch_mu[b], ratio[i]);
    mu = std::max(mu, ratio[i]);
    head_sufficient = head_sufficient && lhs[i] <= head[i];
    col_pair.push_back(static_cast<double>(i));
    col_batch.push_back(static_cast<double>(b));
  }
  double lo = kInf, hi = 0.0;
  for (std::size_t b = 0; b < batch_mu.size(); ++b) {
    rep.scalars[indexed("mu_batch", b)] = batch_mu[b];
    lo = std::min(lo, batch_mu[b]);
    hi = std::max(hi, batch_mu[b]);
  }
  rep.traces.push_back(Series{"pairs",
                              {"pair", "batch", "lhs", "head", "tail_integral", "ratio"},
                              {"1", "1", "e1^2", "e1^2", "energy^2 time", "1/time"},
                              {col_pair, col_batch, lhs, head, tail, ratio}});
  const double J0 = cfg.linear_test_mode ? cfg.linear_damping : model.damping.J0();
  rep.scalars["eta"] = opts.eta;
  rep.scalars["gamma0"] = gamma0;
  rep.scalars["horizon"] = T;
  rep.scalars["mu_emp"] = mu;
  rep.scalars["batch_ratio"] = lo > 0.0 ? hi / lo : (hi == 0.0 ? 1.0 : kInf);
  rep.scalars["linear_contraction"] = std::exp(-J0 * T);
  rep.scalars["head_factor"] = opts.eta * opts.eta / 16.0;
  rep.scalars["head_sufficient"] = head_sufficient ? 1.0 : 0.0;
  rep.verdicts["finite_mu"] = finite && std::isfinite(mu);
  rep.verdicts["batch_stable"] = hi <= opts.batch_ratio * lo;
  return rep;
}

// ---------------------------------------------------------------------------

ProbeReport galerkin_convergence_probe(const Model& model, const ModalState& state0, const IntegratorConfig& cfg,
                                       const ConvergenceOptions& opts) {
  if (opts.modes.size() < 2) throw InvalidArgument("galerkin_convergence_probe needs at least two resolutions");
  for (std::size_t i = 0; i + 1 < opts.modes.size(); ++i)
    if (opts.modes[i] >= opts.modes[i + 1]) throw InvalidArgument("galerkin_convergence_probe: N list must increase");
  check_domain(model, state0);
  const auto& base = model.domain;

  std::vector<SpectralDomain> domains;
  for (int N : opts.modes)
    domains.push_back(SpectralDomain::build(base.dim(), N, base.padding_factor(), base.allow_aliasing()));
  std::vector<ModalState> finals(domains.size());
  parallel_for(domains.size(), [&](std::size_t i) {
    const auto& d = domains[i];
    const Model m = Model::make(d, model.damping, model.nonlinearity, embed(base, d, model.forcing));
    const ModalState s0{embed(base, d, state0.u), embed(base, d, state0.v), state0.t};
    finals[i] = integrate(s0, m, cfg, opts.horizon, 1 << 30).states.back();
  });

  ProbeReport rep;
  rep.name = "galerkin_convergence";
  std::vector<double> nc, nf, dist;
  bool decreasing = true;
  for (std::size_t i = 0; i + 1 < domains.size(); ++i) {
    const auto& fine = domains[i + 1];
    const ModalState coarse{embed(domains[i], fine, finals[i].u), embed(domains[i], fine, finals[i].v), 0.0};
    dist.push_back(energy_distance(fine, coarse, finals[i + 1]));
    nc.push_back(opts.modes[i]);
    nf.push_back(opts.modes[i + 1]);
    rep.scalars["distance_" + std::to_string(opts.modes[i]) + "_" + std::to_string(opts.modes[i + 1])] = dist.back();
    if (i > 0) decreasing = decreasing && dist[i] < dist[i - 1];
  }
  rep.traces.push_back(Series{"distances", {"n_coarse", "n_fine", "distance"}, {"1", "1", "energy"}, {nc, nf, dist}});
  rep.scalars["horizon"] = opts.horizon;
  rep.verdicts["strictly_decreasing"] = decreasing;
  return rep;
}

// ---------------------------------------------------------------------------

ProbeReport lyapunov_probe(const Model& model, const EnsembleSpec& ensemble, const IntegratorConfig& cfg,
                           const LyapunovOptions& opts) {
  if (!(opts.horizon > 0.0)) throw InvalidArgument("lyapunov_probe requires horizon > 0");
  const auto& d = model.domain;
  const auto starts = ensemble_states(d, ensemble);
  IntegratorConfig coarse = cfg;
  coarse.dt = 2.0 * cfg.dt;

  std::vector<LyapunovTrace> traces(starts.size());
  parallel_for(starts.size(), [&](std::size_t i) {
    const auto ref = lyapunov_trace(integrate(starts[i], model, coarse, opts.horizon, std::max(1, opts.stride / 2)));
    const double scale = ref.max_balance_error / 4.0;
    traces[i] = lyapunov_trace(integrate(starts[i], model, cfg, opts.horizon, opts.stride), scale);
  });

  ProbeReport rep;
  rep.name = "lyapunov";
  bool non_inc = true, balance = true, decreasing = true;
  double worst_inc = 0.0, worst_bal = 0.0;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto& lt = traces[i];
    non_inc = non_inc && lt.non_increasing;
    balance = balance && lt.balance_ok;
    decreasing = decreasing && lt.strictly_decreasing;
    worst_inc = std::max(worst_inc, lt.max_increase / lt.tolerance);
    worst_bal = std::max(worst_bal, lt.max_balance_error / lt.tolerance);
    rep.scalars[indexed("residual_scale", i)] = lt.residual_scale;
    std::vector<double> res(lt.phi.size());
    for (std::size_t k = 0; k < res.size(); ++k) res[k] = lt.phi[k] + lt.dissipation[k] - lt.phi.front();
    rep.traces.push_back(Series{indexed("member", i),
                                {"t", "phi", "dissipation", "identity_residual"},
                                {"time", "energy", "energy", "energy"},
                                {lt.times, lt.phi, lt.dissipation, res}});
  }
  rep.scalars["max_increase_over_tolerance"] = worst_inc;
  rep.scalars["max_balance_over_tolerance"] = worst_bal;
  rep.verdicts["non_increasing"] = non_inc;
  rep.verdicts["balance"] = balance;
  rep.verdicts["strictly_decreasing"] = decreasing;
  return rep;
}

}  // namespace nlwave
