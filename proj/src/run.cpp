#include "nlwave/run.hpp"

#include "nlwave/diagnostics.hpp"
#include "nlwave/errors.hpp"
#include "nlwave/io.hpp"
#include "nlwave/parallel.hpp"

#include <Eigen/Core>
#include <fftw3.h>
#include <json.hpp>
#include <sys/utsname.h>

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <functional>

#ifndef NLWAVE_VERSION
#define NLWAVE_VERSION "0.0.0"
#endif

namespace nlwave {

using nlohmann::json;
namespace fs = std::filesystem;

std::string version() { return NLWAVE_VERSION; }

std::map<std::string, std::string> platform_fingerprint() {
  std::map<std::string, std::string> p;
  utsname u{};
  if (uname(&u) == 0) {
    p["os"] = std::string(u.sysname) + " " + u.release;
    p["machine"] = u.machine;
  }
  p["compiler"] = __VERSION__;
  p["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  p["fftw"] = fftw_version;
  p["threads"] = std::to_string(worker_count());
  return p;
}

std::string status_name(RunStatus s) {
  switch (s) {
    case RunStatus::passed:
      return "passed";
    case RunStatus::failed:
      return "failed";
    default:
      return "error";
  }
}

int exit_code(const RunManifest& m) {
  switch (m.status) {
    case RunStatus::passed:
      return 0;
    case RunStatus::failed:
      return 1;
    default:
      return 2;
  }
}

namespace {

json number(double x) {
  if (std::isfinite(x)) return x;
  return std::isnan(x) ? "nan" : (x > 0 ? "inf" : "-inf");
}

json report_json(const ProbeReport& r) {
  json scalars = json::object(), verdicts = json::object();
  for (const auto& [k, v] : r.scalars) scalars[k] = number(v);
  for (const auto& [k, v] : r.verdicts) verdicts[k] = v;
  return {{"name", r.name}, {"scalars", scalars}, {"verdicts", verdicts}, {"passed", r.passed()}};
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Output files keyed by path relative to the run directory.
struct Outputs {
  ProbeReport report;
  std::vector<std::pair<std::string, Series>> traces;
};

class PhaseLog {
 public:
  explicit PhaseLog(std::vector<PhaseRecord>& records) : records_(records) {}
  template <class Fn>
  void run(const std::string& name, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    PhaseRecord rec{name, "ok", 0.0, {}};
    try {
      fn();
    } catch (const std::exception& e) {
      rec.status = "failed";
      rec.message = e.what();
      rec.wall_seconds = seconds(t0);
      records_.push_back(rec);
      throw;
    }
    rec.wall_seconds = seconds(t0);
    records_.push_back(rec);
  }

 private:
  static double seconds(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
  std::vector<PhaseRecord>& records_;
};

std::string mode_label(const SpectralDomain& d, std::size_t flat) {
  const MultiIndex k = d.multi_index(flat);
  std::string s;
  for (int a = 0; a < d.dim(); ++a) s += "_" + std::to_string(k[a]);
  return s;
}

Series trajectory_series(const Trajectory& tr, const IntegratorConfig& cfg) {
  const auto es = energy_trace(tr);
  const bool linear = cfg.linear_test_mode;
  Series s{"trajectory",
           {"t", "energy", "energy_norm", "potential", "dissipation", "identity_residual", "damping"},
           {"time", "energy", "energy", "energy", "energy", "energy", "1/time"},
           std::vector<std::vector<double>>(7)};
  for (std::size_t i = 0; i < tr.states.size(); ++i) {
    const auto& st = tr.states[i];
    const auto& e = es[i];
    s.data[0].push_back(st.t);
    s.data[1].push_back(e.E_u);
    s.data[2].push_back(std::sqrt(e.e_norm_sq));
    s.data[3].push_back(e.potential);
    s.data[4].push_back(e.cumulative_dissipation);
    s.data[5].push_back(e.identity_residual);
    s.data[6].push_back(linear ? cfg.linear_damping : tr.model.damping.J(st.v.squaredNorm()));
  }
  return s;
}

Series states_series(const Trajectory& tr) {
  const auto& d = tr.model.domain;
  const std::size_t n = d.num_modes();
  Series s{"states", {"t"}, {"time"}, {}};
  for (std::size_t k = 0; k < n; ++k) {
    s.columns.push_back("u" + mode_label(d, k));
    s.units.push_back("1");
  }
  for (std::size_t k = 0; k < n; ++k) {
    s.columns.push_back("v" + mode_label(d, k));
    s.units.push_back("1/time");
  }
  s.data.assign(1 + 2 * n, {});
  for (const auto& st : tr.states) {
    s.data[0].push_back(st.t);
    for (std::size_t k = 0; k < n; ++k) {
      s.data[1 + k].push_back(st.u[static_cast<Eigen::Index>(k)]);
      s.data[1 + n + k].push_back(st.v[static_cast<Eigen::Index>(k)]);
    }
  }
  return s;
}

void add_equilibria(const Model& model, const EquilibriumSet& set, Outputs& out) {
  const auto& d = model.domain;
  auto& r = out.report;
  r.scalars["equilibria_count"] = static_cast<double>(set.members.size());
  r.scalars["equilibria_failed_starts"] = static_cast<double>(set.failed_starts);
  for (std::size_t i = 0; i < set.members.size(); ++i) {
    const auto& e = set.members[i];
    const std::string id = std::to_string(i);
    r.scalars["equilibrium_" + id + "_residual"] = e.residual;
    r.scalars["equilibrium_" + id + "_morse_index"] = e.morse_index;
    r.scalars["equilibrium_" + id + "_h1_norm"] = hs_norm(d, e.u_star, 1.0);
    r.scalars["equilibrium_" + id + "_energy"] = energy(ModalState{e.u_star, d.zero_field(), 0.0}, model).E_u;

    Series u{"equilibrium_" + id, {}, {}, {}};
    for (int a = 0; a < d.dim(); ++a) {
      u.columns.push_back("k" + std::to_string(a + 1));
      u.units.push_back("1");
    }
    u.columns.push_back("u_star");
    u.units.push_back("1");
    u.data.assign(static_cast<std::size_t>(d.dim()) + 1, {});
    for (std::size_t k = 0; k < d.num_modes(); ++k) {
      const MultiIndex m = d.multi_index(k);
      for (int a = 0; a < d.dim(); ++a) u.data[static_cast<std::size_t>(a)].push_back(m[a]);
      u.data.back().push_back(e.u_star[static_cast<Eigen::Index>(k)]);
    }
    out.traces.emplace_back("equilibria/" + u.name, std::move(u));
    if (e.eigen_data) {
      Series sp{"spectrum_" + id, {"re", "im"}, {"1/time", "1/time"}, {{}, {}}};
      for (const auto& mu : e.eigen_data->eigenvalues) {
        sp.data[0].push_back(mu.real());
        sp.data[1].push_back(mu.imag());
      }
      out.traces.emplace_back("equilibria/" + sp.name, std::move(sp));
    }
  }
}

void execute(const RunConfig& c, PhaseLog& log, Outputs& out) {
  const auto& e = c.experiment;
  const int stride = c.output.stride;
  Model model = make_model(c);
  const IntegratorConfig& cfg = c.integrator;
  auto take_report = [&](ProbeReport r) {
    for (auto& s : r.traces) out.traces.emplace_back("traces/" + s.name, s);
    r.traces.clear();
    out.report = std::move(r);
  };

  if (e.kind == "simulate") {
    log.run("simulate", [&] {
      const auto tr = integrate(make_initial(model.domain, e.initial), model, cfg, e.horizon, stride);
      ProbeReport r;
      r.name = "simulate";
      const auto es = energy_trace(tr);
      double worst = 0.0;
      for (const auto& x : es) worst = std::max(worst, std::abs(x.identity_residual));
      r.scalars["steps"] = static_cast<double>(tr.steps());
      r.scalars["samples"] = static_cast<double>(tr.states.size());
      r.scalars["dt"] = tr.dt;
      r.scalars["final_time"] = tr.states.back().t;
      r.scalars["final_energy"] = es.back().E_u;
      r.scalars["final_dissipation"] = es.back().cumulative_dissipation;
      r.scalars["max_identity_residual"] = worst / std::max(1.0, std::abs(es.front().E_u));
      r.traces.push_back(trajectory_series(tr, cfg));
      r.traces.push_back(states_series(tr));
      take_report(std::move(r));
    });
  } else if (e.kind == "equilibria") {
    log.run("find_equilibria", [&] {
      MultistartOptions ms = e.multistart;
      ms.newton = e.newton;
      const auto set = find_equilibria(model, ms);
      out.report.name = "equilibria";
      add_equilibria(model, set, out);
      out.report.verdicts["found"] = !set.members.empty();
    });
  } else if (e.kind == "check_assumptions") {
    log.run("check_assumptions", [&] {
      const auto a = check_assumptions(model.damping, model.nonlinearity, e.s_max, e.samples);
      ProbeReport r;
      r.name = "check_assumptions";
      r.scalars["s_max"] = a.s_max;
      r.scalars["samples"] = a.samples;
      r.scalars["p_exponent"] = a.p_exponent;
      r.scalars["monotone_margin"] = a.monotone_margin;
      r.scalars["positivity_margin"] = a.positivity_margin;
      r.scalars["superlinear_margin"] = a.superlinear_margin;
      r.scalars["g_second_margin"] = a.g_second_margin;
      r.scalars["g_prime_margin"] = a.g_prime_margin;
      r.scalars["g_structure_margin"] = a.g_structure_margin;
      r.scalars["G_lower_margin"] = a.G_lower_margin;
      r.scalars["monotone_bypassed"] = a.monotone_bypassed;
      r.scalars["positivity_ok"] = a.positivity_ok;
      r.scalars["superlinear_ok"] = a.superlinear_ok;
      r.scalars["superlinear_applicable"] = a.superlinear_applicable;
      r.scalars["degenerate_flag"] = a.degenerate_flag;
      r.verdicts["monotone"] = a.monotone_ok;
      r.verdicts["damping"] = a.damping_ok();
      r.verdicts["g_zero"] = a.g_zero_ok;
      r.verdicts["g_growth"] = a.g_growth_ok;
      r.verdicts["g_structure"] = a.g_structure_ok;
      r.verdicts["non_degenerate"] = !a.degenerate_flag;
      take_report(std::move(r));
    });
  } else if (e.kind == "dissipativity") {
    log.run("dissipativity_probe", [&] {
      take_report(dissipativity_probe(model, e.ensemble, cfg, {e.horizon, e.ball_margin, stride}));
    });
  } else if (e.kind == "dissipativity_e1") {
    log.run("e1_dissipativity_probe", [&] {
      take_report(e1_dissipativity_probe(model, e.ensemble, cfg, {e.horizon, e.slope_tol, stride}));
    });
  } else if (e.kind == "lipschitz") {
    log.run("lipschitz_probe", [&] {
      const auto pairs = ensemble_pairs(model.domain, e.ensemble, e.separation);
      const LipschitzOptions o{e.horizon, e.tol, stride};
      take_report(e.halving ? lipschitz_halving_probe(model, pairs, cfg, o) : lipschitz_probe(model, pairs, cfg, o));
    });
  } else if (e.kind == "quasistability") {
    log.run("quasistability_probe", [&] {
      const auto pairs = ensemble_pairs(model.domain, e.ensemble, std::nullopt);
      QuasiStabilityOptions o;
      o.eta = e.eta;
      o.gamma0 = e.gamma0;
      o.batches = e.batches;
      o.batch_ratio = e.batch_ratio;
      o.stride = stride;
      take_report(quasistability_probe(model, pairs, cfg, o));
    });
  } else if (e.kind == "attractor") {
    // The probe needs the stationary set; it is computed as its own phase.
    EquilibriumSet set;
    Outputs eq;
    log.run("find_equilibria", [&] {
      MultistartOptions ms = e.multistart;
      ms.newton = e.newton;
      set = find_equilibria(model, ms);
      add_equilibria(model, set, eq);
    });
    log.run("attractor_probe", [&] {
      AttractorOptions o;
      o.horizon = e.horizon;
      o.burn_in = e.burn_in;
      o.tail_fraction = e.tail_fraction;
      o.velocity_tol = e.velocity_tol;
      o.distance_tol = e.distance_tol;
      o.e1_factor = e.e1_factor;
      o.seed_delta = e.seed_delta;
      o.newton = e.newton;
      o.stride = stride;
      take_report(attractor_probe(model, set, e.ensemble, cfg, o));
    });
    for (auto& [k, v] : eq.report.scalars) out.report.scalars[k] = v;
    for (auto& t : eq.traces) out.traces.push_back(std::move(t));
  } else if (e.kind == "convergence") {
    log.run("galerkin_convergence_probe", [&] {
      ConvergenceOptions o;
      o.modes = e.modes;
      o.horizon = e.horizon;
      take_report(galerkin_convergence_probe(model, make_initial(model.domain, e.initial), cfg, o));
    });
  } else {
    throw InvalidArgument("unknown experiment kind '" + e.kind + "'");
  }
}

}  // namespace

std::string RunManifest::to_json() const {
  json phases_j = json::array();
  for (const auto& p : phases) {
    json pj{{"name", p.name}, {"status", p.status}, {"wall_clock_seconds", p.wall_seconds}};
    if (!p.message.empty()) pj["message"] = p.message;
    phases_j.push_back(pj);
  }
  json j{{"tool", "nlwave"},
         {"version", tool_version},
         {"platform", platform},
         {"config", config},
         {"started_utc", started_utc},
         {"wall_clock_seconds", wall_seconds},
         {"phases", phases_j},
         {"digests", digests},
         {"status", status_name(status)},
         {"summary", report_json(report)}};
  if (!error.empty()) j["error"] = error;
  return j.dump(2) + "\n";
}

ProbeReport evaluate(const RunConfig& config) {
  std::vector<PhaseRecord> records;
  PhaseLog log(records);
  Outputs out;
  execute(config, log, out);
  for (auto& [path, series] : out.traces) {
    series.name = path.substr(path.find('/') + 1);
    out.report.traces.push_back(std::move(series));
  }
  return out.report;
}

RunManifest run(const RunConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  RunManifest m;
  m.config = canonical(config);
  m.tool_version = version();
  m.platform = platform_fingerprint();
  m.started_utc = utc_now();
  const fs::path dir = config.output.directory;
  m.directory = dir.string();
  fs::create_directories(dir);

  const TraceFormat fmt = parse_trace_format(config.output.format);
  PhaseLog log(m.phases);
  Outputs out;
  auto emit = [&](const std::string& rel, const std::string& bytes) {
    write_file_atomic(dir / rel, bytes);
    m.digests[rel] = sha256_hex(bytes);
  };
  try {
    execute(config, log, out);
    for (const auto& [rel, series] : out.traces) emit(rel + trace_extension(fmt), encode_trace(series, fmt));
    emit("summary.json", json{{"experiment", config.experiment.kind}, {"report", report_json(out.report)}}.dump(2) + "\n");
    m.report = out.report;
    m.status = out.report.passed() ? RunStatus::passed : RunStatus::failed;
  } catch (const std::exception& e) {
    m.status = RunStatus::error;
    m.error = e.what();
    m.report = out.report;
  }
  m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_file_atomic(dir / "manifest.json", m.to_json());
  return m;
}

}  // namespace nlwave
