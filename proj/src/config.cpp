#include "nlwave/config.hpp"

#include "nlwave/random.hpp"

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace nlwave {

using nlohmann::json;

ConfigError::ConfigError(const std::string& message, std::string key, int line, int column)
    : InvalidArgument([&] {
        std::string where = key.empty() ? std::string("config") : key;
        if (line > 0) where += " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")";
        return where + ": " + message;
      }()),
      key_(std::move(key)),
      line_(line),
      column_(column) {}

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"simulate",     "equilibria",     "check_assumptions",
                                              "dissipativity", "dissipativity_e1", "lipschitz",
                                              "quasistability", "attractor",   "convergence"};
  return kinds;
}

namespace {

const std::vector<std::string> kForcingKinds{"zero", "modal", "random_smooth"};
const std::vector<std::string> kInitialKinds{"random", "zero", "modal"};
const std::vector<std::string> kFormats{"csv", "binary"};

std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
  return s;
}

bool contains(const std::vector<std::string>& v, const std::string& x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

std::string join_path(const std::string& a, const std::string& b) {
  if (b.empty()) return a;
  return a.empty() ? b : a + "." + b;
}

// Key paths set by overrides during the current parse; their marks refer to the
// override text, not the file.
thread_local std::set<std::string> overridden;

bool from_override(const std::string& key) {
  for (const auto& o : overridden)
    if (key == o || key.rfind(o + ".", 0) == 0 || key.rfind(o + "[", 0) == 0) return true;
  return false;
}

[[noreturn]] void fail_at(const std::string& message, const std::string& key, const YAML::Node& node) {
  if (from_override(key)) throw ConfigError(message + " (set by --set)", key);
  const YAML::Mark m = node.IsDefined() ? node.Mark() : YAML::Mark::null_mark();
  if (m.line < 0) throw ConfigError(message, key);
  throw ConfigError(message, key, m.line + 1, m.column + 1);
}

template <class T>
const char* type_name() {
  if constexpr (std::is_same_v<T, bool>) return "a boolean";
  else if constexpr (std::is_same_v<T, std::string>) return "a string";
  else if constexpr (std::is_integral_v<T>) return "an integer";
  else if constexpr (std::is_floating_point_v<T>) return "a number";
  else return "a list";
}

// One mapping of the config.  Every key requested through get/sub is recorded
// as valid; finish() rejects the rest.
class Section {
 public:
  Section(YAML::Node node, std::string path) : node_(std::move(node)), path_(std::move(path)) {
    if (node_.IsDefined() && !node_.IsNull() && !node_.IsMap())
      fail_at("expected a mapping", path_, node_);
  }

  const std::string& path() const { return path_; }

  YAML::Node raw(const std::string& key) {
    used_.insert(key);
    if (!node_.IsDefined() || !node_.IsMap()) return YAML::Node();
    const YAML::Node& c = node_;
    return c[key];
  }

  bool has(const std::string& key) {
    const YAML::Node n = raw(key);
    return n.IsDefined() && !n.IsNull();
  }

  template <class T>
  T get(const std::string& key, T def) {
    const YAML::Node n = raw(key);
    if (!n.IsDefined() || n.IsNull()) return def;
    T value;
    try {
      value = n.as<T>();
    } catch (const YAML::Exception&) {
      fail_at(std::string("expected ") + type_name<T>(), join_path(path_, key), n);
    }
    if constexpr (std::is_floating_point_v<T>) {
      if (!std::isfinite(value)) fail_at("must be finite", join_path(path_, key), n);
    } else if constexpr (std::is_same_v<T, std::vector<double>>) {
      for (double x : value)
        if (!std::isfinite(x)) fail_at("entries must be finite", join_path(path_, key), n);
    }
    return value;
  }

  /// A number or the string "auto" (returned as nullopt).
  std::optional<double> get_auto(const std::string& key, std::optional<double> def) {
    const YAML::Node n = raw(key);
    if (!n.IsDefined() || n.IsNull()) return def;
    if (n.IsScalar() && n.Scalar() == "auto") return std::nullopt;
    return get<double>(key, 0.0);
  }

  std::string get_kind(const std::string& key, const std::string& def, const std::vector<std::string>& valid) {
    const std::string k = get<std::string>(key, def);
    if (!contains(valid, k))
      fail_at("unknown kind '" + k + "'; valid kinds: " + join(valid), join_path(path_, key), raw(key));
    return k;
  }

  Section sub(const std::string& key) { return Section(raw(key), join_path(path_, key)); }

  void check(bool ok, const std::string& key, const std::string& message) {
    if (!ok) fail(key, message);
  }

  [[noreturn]] void fail(const std::string& key, const std::string& message) {
    const YAML::Node n = key.empty() ? YAML::Node() : raw(key);
    if (n.IsDefined()) fail_at(message, join_path(path_, key), n);
    fail_at(message, path_, node_);
  }

  void finish() const {
    if (!node_.IsDefined() || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (!used_.count(key)) {
        std::vector<std::string> valid(used_.begin(), used_.end());
        fail_at("unknown key '" + key + "'; valid keys: " + join(valid), join_path(path_, key), kv.first);
      }
    }
  }

 private:
  YAML::Node node_;
  std::string path_;
  std::set<std::string> used_;
};

// Re-throws library validation errors at the section.
template <class Fn>
void validated(Section& s, Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const InvalidArgument& e) {
    s.fail("", e.what());
  }
}

std::vector<ModalTerm> read_terms(Section& parent, const std::string& key, const DomainConfig& dom) {
  const YAML::Node list = parent.raw(key);
  std::vector<ModalTerm> terms;
  if (!list.IsDefined() || list.IsNull()) return terms;
  const std::string path = join_path(parent.path(), key);
  if (!list.IsSequence()) fail_at("expected a list of {mode, value} entries", path, list);
  for (std::size_t i = 0; i < list.size(); ++i) {
    Section t(list[i], path + "[" + std::to_string(i) + "]");
    ModalTerm term;
    term.mode = t.get<std::vector<int>>("mode", {});
    term.value = t.get<double>("value", 0.0);
    t.check(t.has("mode"), "mode", "missing mode index list");
    t.check(static_cast<int>(term.mode.size()) == dom.dim, "mode",
            "needs one index per axis (" + std::to_string(dom.dim) + ")");
    for (int k : term.mode) t.check(k >= 1 && k <= dom.modes, "mode", "indices must lie in [1, modes]");
    t.finish();
    terms.push_back(std::move(term));
  }
  return terms;
}

void read_domain(Section s, DomainConfig& c) {
  c.dim = s.get("dim", c.dim);
  c.modes = s.get("modes", c.modes);
  c.padding_factor = s.get("padding_factor", c.padding_factor);
  c.allow_aliasing = s.get("allow_aliasing", c.allow_aliasing);
  s.check(c.dim >= 1 && c.dim <= 3, "dim", "must be 1, 2 or 3");
  s.check(c.modes >= 1, "modes", "must be >= 1");
  s.check(c.padding_factor > 0.0, "padding_factor", "must be > 0");
  s.check(c.padding_factor >= 3.0 || c.allow_aliasing, "padding_factor",
          "below 3 the quintic product aliases; set allow_aliasing: true to accept");
  s.finish();
}

void read_damping(Section s, DampingConfig& c) {
  c.kind = s.get_kind("kind", c.kind, DampingLaw::kind_names());
  if (c.kind == "constant") {
    c.gamma = s.get("gamma", c.gamma);
  } else if (c.kind == "hyperbolic" || c.kind == "logistic") {
    c.a = s.get("a", c.a);
    c.b = s.get("b", c.b);
  } else if (c.kind == "shifted_power") {
    c.epsilon = s.get("epsilon", c.epsilon);
    c.p = s.get("p", c.p);
  } else {
    c.p = s.get("p", c.p);
  }
  validated(s, [&] { make_damping(c); });
  s.finish();
}

void read_nonlinearity(Section s, NonlinearityConfig& c) {
  c.kind = s.get_kind("kind", c.kind, Nonlinearity::kind_names());
  if (c.kind == "odd_power") {
    c.q = s.get("q", c.q);
  } else if (c.kind == "bistable") {
    c.q = s.get("q", c.q);
    c.a = s.get("a", c.a);
  } else {
    c.coefficients = s.get("coefficients", c.coefficients);
    s.check(s.has("coefficients"), "coefficients", "required for custom_odd_polynomial");
    Section k = s.sub("constants");
    s.check(s.has("constants"), "constants", "structural constants are required for custom_odd_polynomial");
    c.constants.kappa1 = k.get("kappa1", c.constants.kappa1);
    c.constants.kappa2 = k.get("kappa2", c.constants.kappa2);
    c.constants.kappa3 = k.get("kappa3", c.constants.kappa3);
    c.constants.kappa4 = k.get("kappa4", c.constants.kappa4);
    c.constants.kappa5 = k.get("kappa5", c.constants.kappa5);
    c.constants.C_g = k.get("C_g", c.constants.C_g);
    k.finish();
  }
  validated(s, [&] { make_nonlinearity(c); });
  s.finish();
}

void read_forcing(Section s, ForcingConfig& c, const DomainConfig& dom) {
  c.kind = s.get_kind("kind", c.kind, kForcingKinds);
  if (c.kind == "modal") {
    c.terms = read_terms(s, "terms", dom);
  } else if (c.kind == "random_smooth") {
    c.seed = s.get("seed", c.seed);
    c.decay = s.get("decay", c.decay);
    c.amplitude = s.get("amplitude", c.amplitude);
    c.band = s.get("band", c.band);
    s.check(c.band >= 0, "band", "must be >= 0");
  }
  s.finish();
}

void read_integrator(Section s, IntegratorConfig& c) {
  const YAML::Node scheme = s.raw("scheme");
  if (scheme.IsDefined() && !scheme.IsNull()) {
    const std::string name = s.get<std::string>("scheme", "");
    try {
      c.scheme = parse_scheme(name);
    } catch (const InvalidArgument&) {
      fail_at("unknown scheme '" + name + "'; valid schemes: implicit_midpoint, semi_implicit_exponential",
              join_path(s.path(), "scheme"), scheme);
    }
  }
  c.dt = s.get("dt", c.dt);
  c.scalar_tol = s.get("scalar_tol", c.scalar_tol);
  c.scalar_max_iter = s.get("scalar_max_iter", c.scalar_max_iter);
  c.nonlinear_tol = s.get("nonlinear_tol", c.nonlinear_tol);
  c.nonlinear_max_sweeps = s.get("nonlinear_max_sweeps", c.nonlinear_max_sweeps);
  c.linear_test_mode = s.get("linear_test_mode", c.linear_test_mode);
  c.linear_damping = s.get("linear_damping", c.linear_damping);
  c.growth_guard = s.get("growth_guard", c.growth_guard);
  s.check(c.dt > 0.0, "dt", "must be > 0");
  validated(s, [&] { c.validate(); });
  s.finish();
}

void read_ensemble(Section s, EnsembleSpec& e) {
  e.count = s.get("count", e.count);
  e.r_min = s.get("r_min", e.r_min);
  e.r_max = s.get("r_max", e.r_max);
  e.mode_band = s.get("mode_band", e.mode_band);
  e.seed = s.get("seed", e.seed);
  e.decay = s.get("decay", e.decay);
  validated(s, [&] { e.validate(); });
  s.finish();
}

void read_multistart(Section s, MultistartOptions& m) {
  m.count = s.get("count", m.count);
  m.amplitude_min = s.get("amplitude_min", m.amplitude_min);
  m.amplitude_max = s.get("amplitude_max", m.amplitude_max);
  m.seed = s.get("seed", m.seed);
  m.structured_modes = s.get("structured_modes", m.structured_modes);
  m.dedup_tol = s.get("dedup_tol", m.dedup_tol);
  s.check(m.count >= 0, "count", "must be >= 0");
  s.check(m.amplitude_min >= 0.0 && m.amplitude_min <= m.amplitude_max, "amplitude_max",
          "requires 0 <= amplitude_min <= amplitude_max");
  s.check(m.structured_modes >= 0, "structured_modes", "must be >= 0");
  s.check(m.dedup_tol > 0.0, "dedup_tol", "must be > 0");
  s.finish();
}

void read_newton(Section s, NewtonOptions& n) {
  n.tol = s.get("tol", n.tol);
  n.max_steps = s.get("max_steps", n.max_steps);
  s.check(n.tol > 0.0, "tol", "must be > 0");
  s.check(n.max_steps >= 1, "max_steps", "must be >= 1");
  s.finish();
}

void read_initial(Section s, InitialConfig& c, const DomainConfig& dom) {
  c.kind = s.get_kind("kind", c.kind, kInitialKinds);
  if (c.kind == "random") {
    c.norm = s.get("norm", c.norm);
    c.decay = s.get("decay", c.decay);
    c.band = s.get("band", c.band);
    c.seed = s.get("seed", c.seed);
    s.check(c.norm >= 0.0, "norm", "must be >= 0");
    s.check(c.band >= 0, "band", "must be >= 0");
  } else if (c.kind == "modal") {
    c.u = read_terms(s, "u", dom);
    c.v = read_terms(s, "v", dom);
  }
  s.finish();
}

double default_horizon(const std::string& kind) {
  if (kind == "dissipativity" || kind == "dissipativity_e1") return 100.0;
  if (kind == "attractor") return 200.0;
  if (kind == "lipschitz" || kind == "convergence") return 5.0;
  return 1.0;
}

bool uses_horizon(const std::string& k) {
  return k != "equilibria" && k != "check_assumptions" && k != "quasistability";
}
bool uses_ensemble(const std::string& k) {
  return k == "dissipativity" || k == "dissipativity_e1" || k == "lipschitz" || k == "quasistability" ||
         k == "attractor";
}
bool uses_equilibria(const std::string& k) { return k == "equilibria" || k == "attractor"; }
bool uses_initial(const std::string& k) { return k == "simulate" || k == "convergence"; }

void read_experiment(Section s, ExperimentConfig& c, const DomainConfig& dom) {
  c.kind = s.get_kind("kind", c.kind, experiment_kinds());
  const std::string& k = c.kind;
  if (uses_horizon(k)) {
    c.horizon = s.get("horizon", default_horizon(k));
    s.check(c.horizon > 0.0, "horizon", "must be > 0");
  }
  if (uses_initial(k)) read_initial(s.sub("initial"), c.initial, dom);
  if (uses_ensemble(k)) read_ensemble(s.sub("ensemble"), c.ensemble);
  if (uses_equilibria(k)) {
    read_multistart(s.sub("multistart"), c.multistart);
    read_newton(s.sub("newton"), c.newton);
  }
  if (k == "check_assumptions") {
    c.s_max = s.get("s_max", c.s_max);
    c.samples = s.get("samples", c.samples);
    s.check(c.s_max > 0.0, "s_max", "must be > 0");
    s.check(c.samples >= 2, "samples", "must be >= 2");
  } else if (k == "dissipativity") {
    c.ball_margin = s.get("ball_margin", c.ball_margin);
    s.check(c.ball_margin >= 0.0, "ball_margin", "must be >= 0");
  } else if (k == "dissipativity_e1") {
    c.slope_tol = s.get("slope_tol", c.slope_tol);
    s.check(c.slope_tol > 0.0, "slope_tol", "must be > 0");
  } else if (k == "lipschitz") {
    c.separation = s.get("separation", c.separation);
    c.tol = s.get("tol", c.tol);
    c.halving = s.get("halving", c.halving);
    s.check(c.separation > 0.0, "separation", "must be > 0");
    s.check(c.tol >= 0.0, "tol", "must be >= 0");
  } else if (k == "quasistability") {
    c.eta = s.get("eta", c.eta);
    c.gamma0 = s.get_auto("gamma0", c.gamma0);
    c.batches = s.get("batches", c.batches);
    c.batch_ratio = s.get("batch_ratio", c.batch_ratio);
    s.check(c.eta > 0.0 && c.eta < 1.0, "eta", "must lie in (0, 1)");
    s.check(!c.gamma0 || *c.gamma0 > 0.0, "gamma0", "must be > 0 or auto");
    s.check(c.batches >= 1 && c.batches <= c.ensemble.count, "batches", "must lie in [1, ensemble.count]");
    s.check(c.batch_ratio >= 1.0, "batch_ratio", "must be >= 1");
  } else if (k == "attractor") {
    c.burn_in = s.get_auto("burn_in", c.burn_in);
    c.tail_fraction = s.get("tail_fraction", c.tail_fraction);
    c.velocity_tol = s.get("velocity_tol", c.velocity_tol);
    c.distance_tol = s.get("distance_tol", c.distance_tol);
    c.e1_factor = s.get("e1_factor", c.e1_factor);
    c.seed_delta = s.get_auto("seed_delta", c.seed_delta);
    s.check(!c.burn_in || (*c.burn_in >= 0.0 && *c.burn_in < c.horizon), "burn_in", "must lie in [0, horizon)");
    s.check(c.tail_fraction > 0.0 && c.tail_fraction <= 1.0, "tail_fraction", "must lie in (0, 1]");
    s.check(c.velocity_tol > 0.0, "velocity_tol", "must be > 0");
    s.check(c.distance_tol > 0.0, "distance_tol", "must be > 0");
    s.check(c.e1_factor > 0.0, "e1_factor", "must be > 0");
    s.check(!c.seed_delta || *c.seed_delta > 0.0, "seed_delta", "must be > 0 or auto");
  } else if (k == "convergence") {
    c.modes = s.get("modes", c.modes);
    s.check(c.modes.size() >= 2, "modes", "needs at least two mode counts");
    for (std::size_t i = 0; i < c.modes.size(); ++i)
      s.check(c.modes[i] >= 1 && (i == 0 || c.modes[i] > c.modes[i - 1]), "modes",
              "must be positive and strictly increasing");
  }
  s.finish();
}

void read_output(Section s, OutputConfig& c) {
  c.directory = s.get("directory", c.directory);
  c.stride = s.get("stride", c.stride);
  c.format = s.get_kind("format", c.format, kFormats);
  s.check(!c.directory.empty(), "directory", "must not be empty");
  s.check(c.stride >= 1, "stride", "must be >= 1");
  s.finish();
}

void apply_override(YAML::Node& root, const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must have the form section.key=value", spec);
  const std::string path = spec.substr(0, eq);
  std::vector<std::string> keys;
  std::stringstream ss(path);
  for (std::string k; std::getline(ss, k, '.');) {
    if (k.empty()) throw ConfigError("empty key in override", path);
    keys.push_back(k);
  }
  if (keys.empty() || path.back() == '.') throw ConfigError("empty key in override", path);
  YAML::Node value;
  try {
    value = YAML::Load(spec.substr(eq + 1));
  } catch (const YAML::Exception& e) {
    throw ConfigError("override value does not parse: " + e.msg, path);
  }
  if (!root.IsDefined() || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  YAML::Node cur = root;
  for (std::size_t i = 0; i + 1 < keys.size(); ++i) {
    YAML::Node next = cur[keys[i]];
    if (!next.IsDefined() || next.IsNull()) {
      cur[keys[i]] = YAML::Node(YAML::NodeType::Map);
      next.reset(cur[keys[i]]);
    } else if (!next.IsMap()) {
      throw ConfigError("override descends into a non-mapping value", path);
    }
    cur.reset(next);
  }
  cur[keys.back()] = value;
  overridden.insert(path);
}

RunConfig parse_tree(const YAML::Node& root) {
  Section top(root, "");
  RunConfig c;
  read_domain(top.sub("domain"), c.domain);
  {
    Section m = top.sub("model");
    read_damping(m.sub("damping"), c.model.damping);
    read_nonlinearity(m.sub("nonlinearity"), c.model.nonlinearity);
    read_forcing(m.sub("forcing"), c.model.forcing, c.domain);
    m.finish();
  }
  read_integrator(top.sub("integrator"), c.integrator);
  read_experiment(top.sub("experiment"), c.experiment, c.domain);
  read_output(top.sub("output"), c.output);
  top.finish();
  return c;
}

// ---------------------------------------------------------------------------
// Canonical form.

json terms_json(const std::vector<ModalTerm>& terms) {
  json a = json::array();
  for (const auto& t : terms) a.push_back({{"mode", t.mode}, {"value", t.value}});
  return a;
}

json auto_json(const std::optional<double>& x) { return x ? json(*x) : json("auto"); }

json to_json(const RunConfig& c) {
  json j;
  j["domain"] = {{"dim", c.domain.dim},
                 {"modes", c.domain.modes},
                 {"padding_factor", c.domain.padding_factor},
                 {"allow_aliasing", c.domain.allow_aliasing}};

  const auto& d = c.model.damping;
  json dj{{"kind", d.kind}};
  if (d.kind == "constant") dj["gamma"] = d.gamma;
  else if (d.kind == "hyperbolic" || d.kind == "logistic") dj["a"] = d.a, dj["b"] = d.b;
  else if (d.kind == "shifted_power") dj["epsilon"] = d.epsilon, dj["p"] = d.p;
  else dj["p"] = d.p;

  const auto& n = c.model.nonlinearity;
  json nj{{"kind", n.kind}};
  if (n.kind == "odd_power") nj["q"] = n.q;
  else if (n.kind == "bistable") nj["q"] = n.q, nj["a"] = n.a;
  else {
    nj["coefficients"] = n.coefficients;
    nj["constants"] = {{"kappa1", n.constants.kappa1}, {"kappa2", n.constants.kappa2},
                       {"kappa3", n.constants.kappa3}, {"kappa4", n.constants.kappa4},
                       {"kappa5", n.constants.kappa5}, {"C_g", n.constants.C_g}};
  }

  const auto& f = c.model.forcing;
  json fj{{"kind", f.kind}};
  if (f.kind == "modal") fj["terms"] = terms_json(f.terms);
  else if (f.kind == "random_smooth")
    fj["seed"] = f.seed, fj["decay"] = f.decay, fj["amplitude"] = f.amplitude, fj["band"] = f.band;
  j["model"] = {{"damping", dj}, {"nonlinearity", nj}, {"forcing", fj}};

  const auto& i = c.integrator;
  j["integrator"] = {{"scheme", scheme_name(i.scheme)},
                     {"dt", i.dt},
                     {"scalar_tol", i.scalar_tol},
                     {"scalar_max_iter", i.scalar_max_iter},
                     {"nonlinear_tol", i.nonlinear_tol},
                     {"nonlinear_max_sweeps", i.nonlinear_max_sweeps},
                     {"linear_test_mode", i.linear_test_mode},
                     {"linear_damping", i.linear_damping},
                     {"growth_guard", i.growth_guard}};

  const auto& e = c.experiment;
  const std::string& k = e.kind;
  json ej{{"kind", k}};
  if (uses_horizon(k)) ej["horizon"] = e.horizon;
  if (uses_initial(k)) {
    json ij{{"kind", e.initial.kind}};
    if (e.initial.kind == "random")
      ij["norm"] = e.initial.norm, ij["decay"] = e.initial.decay, ij["band"] = e.initial.band,
      ij["seed"] = e.initial.seed;
    else if (e.initial.kind == "modal")
      ij["u"] = terms_json(e.initial.u), ij["v"] = terms_json(e.initial.v);
    ej["initial"] = ij;
  }
  if (uses_ensemble(k))
    ej["ensemble"] = {{"count", e.ensemble.count}, {"r_min", e.ensemble.r_min},     {"r_max", e.ensemble.r_max},
                      {"mode_band", e.ensemble.mode_band}, {"seed", e.ensemble.seed}, {"decay", e.ensemble.decay}};
  if (uses_equilibria(k)) {
    const auto& m = e.multistart;
    ej["multistart"] = {{"count", m.count},
                        {"amplitude_min", m.amplitude_min},
                        {"amplitude_max", m.amplitude_max},
                        {"seed", m.seed},
                        {"structured_modes", m.structured_modes},
                        {"dedup_tol", m.dedup_tol}};
    ej["newton"] = {{"tol", e.newton.tol}, {"max_steps", e.newton.max_steps}};
  }
  if (k == "check_assumptions") {
    ej["s_max"] = e.s_max;
    ej["samples"] = e.samples;
  } else if (k == "dissipativity") {
    ej["ball_margin"] = e.ball_margin;
  } else if (k == "dissipativity_e1") {
    ej["slope_tol"] = e.slope_tol;
  } else if (k == "lipschitz") {
    ej["separation"] = e.separation;
    ej["tol"] = e.tol;
    ej["halving"] = e.halving;
  } else if (k == "quasistability") {
    ej["eta"] = e.eta;
    ej["gamma0"] = auto_json(e.gamma0);
    ej["batches"] = e.batches;
    ej["batch_ratio"] = e.batch_ratio;
  } else if (k == "attractor") {
    ej["burn_in"] = auto_json(e.burn_in);
    ej["tail_fraction"] = e.tail_fraction;
    ej["velocity_tol"] = e.velocity_tol;
    ej["distance_tol"] = e.distance_tol;
    ej["e1_factor"] = e.e1_factor;
    ej["seed_delta"] = auto_json(e.seed_delta);
  } else if (k == "convergence") {
    ej["modes"] = e.modes;
  }
  j["experiment"] = ej;
  j["output"] = {{"directory", c.output.directory}, {"stride", c.output.stride}, {"format", c.output.format}};
  return j;
}

std::string shortest(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  std::string s(buf, r.ptr);
  // Keep floats recognisable as floats.
  if (s.find_first_of(".en") == std::string::npos) s += ".0";
  return s;
}

void emit(YAML::Emitter& out, const json& j) {
  switch (j.type()) {
    case json::value_t::object:
      out << YAML::BeginMap;
      for (const auto& [key, value] : j.items()) {
        out << YAML::Key << key << YAML::Value;
        emit(out, value);
      }
      out << YAML::EndMap;
      break;
    case json::value_t::array: {
      const bool flat = std::all_of(j.begin(), j.end(), [](const json& x) { return x.is_primitive(); });
      if (flat) out << YAML::Flow;
      out << YAML::BeginSeq;
      for (const auto& x : j) emit(out, x);
      out << YAML::EndSeq;
      break;
    }
    case json::value_t::number_float:
      out << shortest(j.get<double>());
      break;
    case json::value_t::number_integer:
      out << std::to_string(j.get<std::int64_t>());
      break;
    case json::value_t::number_unsigned:
      out << std::to_string(j.get<std::uint64_t>());
      break;
    case json::value_t::boolean:
      out << (j.get<bool>() ? "true" : "false");
      break;
    case json::value_t::string:
      out << YAML::DoubleQuoted << j.get<std::string>();
      break;
    default:
      out << YAML::Null;
  }
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides,
                       const std::optional<std::string>& kind) {
  overridden.clear();
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("syntax error: " + e.msg, "", e.mark.line + 1, e.mark.column + 1);
  }
  for (const auto& o : overrides) apply_override(root, o);
  if (kind) {
    const YAML::Node& croot = root;
    YAML::Node given;
    if (croot.IsDefined() && croot.IsMap()) {
      const YAML::Node exp = croot["experiment"];
      if (exp.IsDefined() && exp.IsMap()) {
        // reset() throws on the placeholder node of a missing key.
        const YAML::Node k = exp["kind"];
        if (k.IsDefined()) given.reset(k);
      }
    }
    if (given.IsDefined() && !given.IsNull()) {
      if (!given.IsScalar() || given.Scalar() != *kind)
        fail_at("experiment kind '" + (given.IsScalar() ? given.Scalar() : std::string("?")) +
                    "' does not match the requested '" + *kind + "'",
                "experiment.kind", given);
    } else {
      apply_override(root, "experiment.kind=" + *kind);
    }
  }
  return parse_tree(root);
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides,
                      const std::optional<std::string>& kind) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'", "");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides, kind);
}

std::string canonical(const RunConfig& config) {
  YAML::Emitter out;
  emit(out, to_json(config));
  return std::string(out.c_str()) + "\n";
}

bool RunConfig::operator==(const RunConfig& o) const { return canonical(*this) == canonical(o); }

SpectralDomain make_domain(const DomainConfig& c) {
  return SpectralDomain::build(c.dim, c.modes, c.padding_factor, c.allow_aliasing);
}

DampingLaw make_damping(const DampingConfig& c) {
  if (c.kind == "constant") return DampingLaw::constant(c.gamma);
  if (c.kind == "hyperbolic") return DampingLaw::hyperbolic(c.a, c.b);
  if (c.kind == "logistic") return DampingLaw::logistic(c.a, c.b);
  if (c.kind == "shifted_power") return DampingLaw::shifted_power(c.epsilon, c.p);
  if (c.kind == "pure_power") return DampingLaw::pure_power(c.p);
  throw InvalidArgument("unknown damping kind '" + c.kind + "'; valid kinds: " + join(DampingLaw::kind_names()));
}

Nonlinearity make_nonlinearity(const NonlinearityConfig& c) {
  if (c.kind == "odd_power") return Nonlinearity::odd_power(c.q);
  if (c.kind == "bistable") return Nonlinearity::bistable(c.q, c.a);
  if (c.kind == "custom_odd_polynomial") return Nonlinearity::custom(c.coefficients, c.constants);
  throw InvalidArgument("unknown nonlinearity kind '" + c.kind + "'; valid kinds: " +
                        join(Nonlinearity::kind_names()));
}

Field modal_field(const SpectralDomain& domain, const std::vector<ModalTerm>& terms) {
  Field f = domain.zero_field();
  for (const auto& t : terms) {
    if (static_cast<int>(t.mode.size()) != domain.dim()) throw InvalidArgument("mode index has the wrong length");
    MultiIndex k{0, 0, 0};
    for (std::size_t a = 0; a < t.mode.size(); ++a) k[a] = t.mode[a];
    f[static_cast<Eigen::Index>(domain.flat_index(k))] += t.value;
  }
  return f;
}

Model make_model(const RunConfig& c) {
  const SpectralDomain d = make_domain(c.domain);
  Field h = d.zero_field();
  const auto& f = c.model.forcing;
  if (f.kind == "modal") {
    h = modal_field(d, f.terms);
  } else if (f.kind == "random_smooth") {
    SplitMix64 rng(f.seed);
    h = random_smooth_field(d, rng, f.decay, f.amplitude, f.band);
  }
  return Model::make(d, make_damping(c.model.damping), make_nonlinearity(c.model.nonlinearity), h);
}

ModalState make_initial(const SpectralDomain& domain, const InitialConfig& c) {
  if (c.kind == "zero") return zero_state(domain);
  if (c.kind == "modal") return ModalState{modal_field(domain, c.u), modal_field(domain, c.v), 0.0};
  SplitMix64 rng(c.seed);
  return random_state(domain, rng, c.norm, c.decay, c.band);
}

}  // namespace nlwave
