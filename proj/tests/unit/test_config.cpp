#include <doctest.h>

#include "nlwave/config.hpp"
#include "nlwave/io.hpp"
#include "nlwave/run.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace nlwave;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"(
domain:
  dim: 1
  modes: 32
model:
  damping: {kind: shifted_power, epsilon: 0.1, p: 2}
  nonlinearity: {kind: odd_power, q: 5}
experiment:
  kind: simulate
)";

template <class Fn>
ConfigError config_error(Fn&& fn) {
  try {
    fn();
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("expected a ConfigError");
  return ConfigError("", "");
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nlwave_unit_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("minimal config round trips through its canonical form") {
  const RunConfig c = parse_config(kMinimal);
  CHECK(c.domain.modes == 32);
  CHECK(c.model.damping.kind == "shifted_power");
  CHECK(c.experiment.horizon == 1.0);
  const std::string canon = canonical(c);
  const RunConfig again = parse_config(canon);
  CHECK(again == c);
  CHECK(canonical(again) == canon);
  CHECK(parse_config("") == RunConfig{});
}

TEST_CASE("canonical form keeps every kind-specific default") {
  for (const auto& kind : experiment_kinds()) {
    const RunConfig c = parse_config("experiment: {kind: " + kind + "}");
    const std::string canon = canonical(c);
    CHECK(canonical(parse_config(canon)) == canon);
  }
  const RunConfig q = parse_config("experiment: {kind: quasistability, gamma0: auto}");
  CHECK_FALSE(q.experiment.gamma0);
  CHECK(canonical(q).find("gamma0: \"auto\"") != std::string::npos);
  const RunConfig a = parse_config("experiment: {kind: attractor, burn_in: 50}");
  CHECK(*a.experiment.burn_in == 50.0);
  CHECK(a.experiment.horizon == 200.0);

  RunConfig f;
  f.integrator.dt = 0.1;
  f.model.damping.epsilon = 1.0 / 3.0;
  CHECK(parse_config(canonical(f)).model.damping.epsilon == 1.0 / 3.0);
}

TEST_CASE("JSON is accepted") {
  const RunConfig c = parse_config(R"({"domain": {"dim": 2, "modes": 4}, "integrator": {"dt": 0.01}})");
  CHECK(c.domain.dim == 2);
  CHECK(c.integrator.dt == 0.01);
}

TEST_CASE("config errors carry their location") {
  const auto alias = config_error([] { parse_config("domain: {padding_factor: 2}"); });
  CHECK(alias.key() == "domain.padding_factor");
  CHECK(std::string(alias.what()).find("alias") != std::string::npos);
  CHECK(parse_config("domain: {padding_factor: 2, allow_aliasing: true, modes: 4}").domain.padding_factor == 2.0);

  const auto kind = config_error([] { parse_config("model:\n  damping:\n    kind: quadratic\n"); });
  CHECK(kind.key() == "model.damping.kind");
  CHECK(kind.line() == 3);
  CHECK(kind.column() == 11);
  CHECK(std::string(kind.what()).find("hyperbolic") != std::string::npos);

  const auto unknown = config_error([] { parse_config("domain:\n  dim: 1\n  mdoes: 4\n"); });
  CHECK(unknown.key() == "domain.mdoes");
  CHECK(unknown.line() == 3);
  CHECK(unknown.column() == 3);

  const auto syntax = config_error([] { parse_config("domain: {dim: 1\n"); });
  CHECK(syntax.line() >= 1);

  const auto type = config_error([] { parse_config("domain: {dim: one}"); });
  CHECK(type.key() == "domain.dim");

  CHECK(config_error([] { parse_config("integrator: {dt: -1}"); }).key() == "integrator.dt");
  CHECK(config_error([] { parse_config("integrator: {scheme: rk4}"); }).key() == "integrator.scheme");
  CHECK(config_error([] { parse_config("model: {damping: {kind: hyperbolic, a: 3, b: 2}}"); }).key() ==
        "model.damping");
  // Keys of other kinds are unknown.
  CHECK(config_error([] { parse_config("model: {damping: {kind: constant, epsilon: 1}}"); }).key() ==
        "model.damping.epsilon");
  CHECK(config_error([] { parse_config("experiment: {kind: simulate, eta: 0.5}"); }).key() == "experiment.eta");
  CHECK(config_error([] { parse_config("experiment: {kind: quasistability, eta: 1.5}"); }).key() ==
        "experiment.eta");
  CHECK(config_error([] { parse_config("model: {forcing: {kind: modal, terms: [{mode: [9], value: 1}]}}\n"
                                       "domain: {modes: 4}"); })
            .key() == "model.forcing.terms[0].mode");
  CHECK(config_error([] { parse_config("experiment: {kind: convergence, modes: [8, 8]}"); }).key() ==
        "experiment.modes");
  CHECK(config_error([] { parse_config("[1, 2]"); }).key().empty());
}

TEST_CASE("overrides") {
  const RunConfig c = parse_config(kMinimal, {"integrator.dt=0.005", "output.format=binary", "domain.modes=8",
                                              "experiment.initial.kind=zero"});
  CHECK(c.integrator.dt == 0.005);
  CHECK(c.output.format == "binary");
  CHECK(c.domain.modes == 8);
  CHECK(c.experiment.initial.kind == "zero");
  CHECK(parse_config("", {"experiment.kind=convergence", "experiment.modes=[4, 8]"}).experiment.modes ==
        std::vector<int>{4, 8});

  const auto bad = config_error([] { parse_config(kMinimal, {"integrator.dt=-1"}); });
  CHECK(bad.key() == "integrator.dt");
  CHECK(bad.line() == 0);
  CHECK_THROWS_AS(parse_config(kMinimal, {"integrator"}), ConfigError);
  CHECK_THROWS_AS(parse_config(kMinimal, {"domain.dim.x=1"}), ConfigError);
  CHECK_THROWS_AS(parse_config(kMinimal, {"domain..dim=1"}), ConfigError);
}

TEST_CASE("required experiment kind") {
  CHECK(parse_config("", {}, std::string("lipschitz")).experiment.kind == "lipschitz");
  CHECK(parse_config("", {"experiment.horizon=2"}, std::string("simulate")).experiment.horizon == 2.0);
  CHECK(parse_config("experiment: {horizon: 2}", {}, std::string("simulate")).experiment.kind == "simulate");
  CHECK(parse_config(kMinimal, {}, std::string("simulate")).experiment.kind == "simulate");
  const auto e = config_error([] { parse_config(kMinimal, {}, std::string("attractor")); });
  CHECK(e.key() == "experiment.kind");
}

TEST_CASE("model construction from a config") {
  const RunConfig c = parse_config(
      "domain: {dim: 2, modes: 3}\n"
      "model:\n"
      "  forcing: {kind: modal, terms: [{mode: [1, 2], value: 0.5}, {mode: [3, 3], value: -1}]}\n");
  const Model m = make_model(c);
  CHECK(m.forcing[m.domain.flat_index({1, 2, 0})] == 0.5);
  CHECK(m.forcing[m.domain.flat_index({3, 3, 0})] == -1.0);
  CHECK(m.forcing.cwiseAbs().sum() == 1.5);

  const RunConfig r = parse_config("model: {forcing: {kind: random_smooth, seed: 4}}\ndomain: {modes: 6}");
  CHECK((make_model(r).forcing - make_model(r).forcing).norm() == 0.0);
  CHECK(make_model(r).forcing.norm() > 0.0);

  const RunConfig custom = parse_config(
      "model: {nonlinearity: {kind: custom_odd_polynomial, coefficients: [0, 1],"
      " constants: {kappa1: 0, kappa2: 3, kappa3: 0, kappa4: 0.25, kappa5: 0, C_g: 6}}}");
  CHECK(make_model(custom).nonlinearity.g(2.0) == 8.0);
  CHECK(canonical(parse_config(canonical(custom))) == canonical(custom));
  CHECK_THROWS_AS(parse_config("model: {nonlinearity: {kind: custom_odd_polynomial, coefficients: [0, 1]}}"),
                  ConfigError);

  const ModalState s = make_initial(m.domain, c.experiment.initial);
  CHECK(energy_norm(m.domain, s) == doctest::Approx(1.0));
}

TEST_CASE("trace formats round trip exactly") {
  const double tiny = std::numeric_limits<double>::denorm_min();
  Series s{"x", {"t", "value"}, {"time", "energy"}, {{0.0, 0.1, 1.0 / 3.0, 1e308}, {-0.0, tiny, -2.5e-300, 7.0}}};
  for (const auto f : {TraceFormat::csv, TraceFormat::binary}) {
    const Series back = decode_trace(encode_trace(s, f));
    CHECK(back.columns == s.columns);
    CHECK(back.units == s.units);
    REQUIRE(back.data.size() == 2);
    for (std::size_t j = 0; j < 2; ++j)
      for (std::size_t i = 0; i < 4; ++i) CHECK(back.data[j][i] == s.data[j][i]);
    CHECK(std::signbit(back.data[1][0]));
  }
  const std::string csv = encode_trace(s, TraceFormat::csv);
  CHECK(csv.rfind("t,value\n# units: time,energy\n0,-0\n", 0) == 0);

  const std::string bin = encode_trace(s, TraceFormat::binary);
  CHECK(bin.substr(0, 8) == "NLWTRACE");
  CHECK(static_cast<unsigned char>(bin[8]) == 1);   // version
  CHECK(static_cast<unsigned char>(bin[12]) == 2);  // columns
  CHECK(static_cast<unsigned char>(bin[16]) == 4);  // rows
  CHECK_THROWS_AS(decode_trace(bin.substr(0, bin.size() - 1)), InvalidArgument);
  CHECK_THROWS_AS(decode_trace("t,value\n# units: time,energy\n1\n"), InvalidArgument);
  CHECK_THROWS_AS(decode_trace("t\n1\n"), InvalidArgument);

  Series ragged{"r", {"a", "b"}, {"1", "1"}, {{1.0}, {}}};
  CHECK_THROWS_AS(encode_trace(ragged, TraceFormat::csv), InvalidArgument);
}

TEST_CASE("digests and atomic writes") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  const fs::path dir = scratch("atomic");
  write_file_atomic(dir / "a" / "b.txt", "hello");
  CHECK(slurp(dir / "a" / "b.txt") == "hello");
  CHECK_FALSE(fs::exists(dir / "a" / "b.txt.tmp"));
  fs::remove_all(dir);
}

TEST_CASE("simulate run writes traces, summary and manifest") {
  const fs::path dir = scratch("simulate");
  RunConfig c = parse_config(kMinimal, {"domain.modes=8", "integrator.dt=0.01", "experiment.horizon=1",
                                        "output.stride=10", "output.directory=" + dir.string()});
  const RunManifest m = run(c);
  CHECK(m.status == RunStatus::passed);
  CHECK(exit_code(m) == 0);
  const Series tr = read_trace(dir / "traces" / "trajectory.csv");
  CHECK(tr.rows() == 11);  // horizon / (dt stride) + 1
  CHECK(tr.columns.front() == "t");
  CHECK(tr.data[0].back() == 1.0);

  // Values in the file are the integrator's own, bit for bit.
  const Model model = make_model(c);
  const auto direct = integrate(make_initial(model.domain, c.experiment.initial), model, c.integrator, 1.0, 10);
  const Series st = read_trace(dir / "traces" / "states.csv");
  REQUIRE(st.rows() == direct.states.size());
  for (std::size_t i = 0; i < st.rows(); ++i) CHECK(st.data[1][i] == direct.states[i].u[0]);

  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest.at("status") == "passed");
  CHECK(manifest.at("config") == canonical(c));
  for (const auto& [rel, digest] : manifest.at("digests").items()) CHECK(sha256_hex(slurp(dir / rel)) == digest);
  CHECK(manifest.at("digests").contains("summary.json"));

  c.output.directory = (dir / "again").string();
  const RunManifest m2 = run(c);
  CHECK(m2.digests == m.digests);

  c.output.format = "binary";
  c.output.directory = (dir / "bin").string();
  run(c);
  const Series tb = read_trace(dir / "bin" / "traces" / "trajectory.bin");
  CHECK(tb.data == tr.data);
  fs::remove_all(dir);
}

TEST_CASE("attractor run resolves the equilibrium phase first") {
  const fs::path dir = scratch("attractor");
  const RunConfig c = parse_config(
      "domain: {modes: 8}\n"
      "model: {damping: {kind: hyperbolic, a: 1, b: 2}, nonlinearity: {kind: bistable, q: 5, a: 2}}\n"
      "integrator: {dt: 0.01}\n"
      "experiment: {kind: attractor, horizon: 100, ensemble: {count: 2}}\n"
      "output: {stride: 50, directory: " + dir.string() + "}\n");
  const RunManifest m = run(c);
  REQUIRE(m.phases.size() == 2);
  CHECK(m.phases[0].name == "find_equilibria");
  CHECK(m.phases[1].name == "attractor_probe");
  CHECK(m.report.scalars.at("equilibria_count") == 3.0);
  CHECK(fs::exists(dir / "equilibria" / "equilibrium_0.csv"));
  CHECK(fs::exists(dir / "equilibria" / "spectrum_2.csv"));
  CHECK(m.status == RunStatus::passed);
  fs::remove_all(dir);
}

TEST_CASE("module failures are recorded in the manifest") {
  const fs::path dir = scratch("failure");
  const RunConfig c = parse_config(
      "domain: {modes: 4}\n"
      "model: {damping: {kind: constant, gamma: 1}}\n"
      "integrator: {dt: 10, scheme: semi_implicit_exponential}\n"
      "experiment: {kind: simulate, horizon: 100, initial: {kind: modal, u: [{mode: [1], value: 5}]}}\n"
      "output: {directory: " + dir.string() + "}\n");
  const RunManifest m = run(c);
  CHECK(m.status == RunStatus::error);
  CHECK(exit_code(m) == 2);
  REQUIRE(m.phases.size() == 1);
  CHECK(m.phases[0].status == "failed");
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest.at("status") == "error");
  CHECK(manifest.at("phases")[0].at("status") == "failed");
  fs::remove_all(dir);
}

TEST_CASE("check-assumptions verdicts") {
  const fs::path dir = scratch("assumptions");
  RunConfig c = parse_config("experiment: {kind: check_assumptions}\n"
                             "model: {damping: {kind: hyperbolic, a: 1, b: 2}}\n"
                             "output: {directory: " + dir.string() + "}\n");
  CHECK(exit_code(run(c)) == 0);
  c.model.damping.kind = "pure_power";
  const RunManifest m = run(c);
  CHECK(exit_code(m) == 1);
  CHECK(m.report.scalars.at("degenerate_flag") == 1.0);
  CHECK_FALSE(m.report.verdicts.at("non_degenerate"));
  fs::remove_all(dir);
}

TEST_CASE("evaluate returns the run's series") {
  const RunConfig c = parse_config("domain: {modes: 4}\nexperiment: {kind: convergence, modes: [4, 8], horizon: 0.5}");
  const ProbeReport r = evaluate(c);
  REQUIRE(r.traces.size() == 1);
  CHECK(r.traces[0].name == "distances");
  CHECK(r.traces[0].rows() == 1);
  CHECK(r.traces[0].data[2][0] == r.scalars.at("distance_4_8"));
  const ProbeReport e = evaluate(parse_config("domain: {modes: 4}\nmodel: {nonlinearity: {kind: bistable, a: 2}}\n"
                                              "experiment: {kind: equilibria}"));
  CHECK(e.traces.size() == 6);
  CHECK_THROWS_AS(evaluate(parse_config("integrator: {dt: 10, scheme: semi_implicit_exponential}\n"
                                        "model: {damping: {kind: constant}}\ndomain: {modes: 4}\n"
                                        "experiment: {horizon: 100, initial: {kind: modal, u: [{mode: [1], value: 5}]}}")),
                  std::exception);
}
