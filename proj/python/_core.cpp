#include "nlwave/config.hpp"
#include "nlwave/diagnostics.hpp"
#include "nlwave/io.hpp"
#include "nlwave/run.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

namespace py = pybind11;
using namespace nlwave;

namespace {

using Overrides = std::vector<std::string>;
using Kind = std::optional<std::string>;

py::dict series_dict(const Series& s) {
  py::array_t<double> data({s.rows(), s.columns.size()});
  auto m = data.mutable_unchecked<2>();
  for (std::size_t j = 0; j < s.columns.size(); ++j)
    for (std::size_t i = 0; i < s.rows(); ++i) m(i, j) = s.data[j][i];
  py::dict d;
  d["name"] = s.name;
  d["columns"] = s.columns;
  d["units"] = s.units;
  d["data"] = data;
  return d;
}

py::dict report_dict(const ProbeReport& r) {
  py::dict d;
  d["name"] = r.name;
  d["scalars"] = r.scalars;
  d["verdicts"] = r.verdicts;
  d["passed"] = r.passed();
  py::dict traces;
  for (const auto& s : r.traces) traces[py::str(s.name)] = series_dict(s);
  d["traces"] = traces;
  return d;
}

py::dict simulate(const std::string& text, const Overrides& overrides) {
  const RunConfig c = parse_config(text, overrides, std::string("simulate"));
  const Model model = make_model(c);
  const Trajectory tr = [&] {
    py::gil_scoped_release release;
    return integrate(make_initial(model.domain, c.experiment.initial), model, c.integrator, c.experiment.horizon,
                     c.output.stride);
  }();
  const auto n = static_cast<py::ssize_t>(model.domain.num_modes());
  const auto rows = static_cast<py::ssize_t>(tr.states.size());
  py::array_t<double> t(rows), u({rows, n}), v({rows, n}), e(rows), res(rows);
  auto tm = t.mutable_unchecked<1>();
  auto um = u.mutable_unchecked<2>();
  auto vm = v.mutable_unchecked<2>();
  auto em = e.mutable_unchecked<1>();
  auto rm = res.mutable_unchecked<1>();
  const auto energies = energy_trace(tr);
  for (py::ssize_t i = 0; i < rows; ++i) {
    const auto& s = tr.states[static_cast<std::size_t>(i)];
    tm(i) = s.t;
    em(i) = energies[static_cast<std::size_t>(i)].E_u;
    rm(i) = energies[static_cast<std::size_t>(i)].identity_residual;
    for (py::ssize_t k = 0; k < n; ++k) {
      um(i, k) = s.u[k];
      vm(i, k) = s.v[k];
    }
  }
  py::dict d;
  d["t"] = t;
  d["u"] = u;
  d["v"] = v;
  d["energy"] = e;
  d["identity_residual"] = res;
  d["eigenvalues"] = Eigen::VectorXd(model.domain.eigenvalues());
  return d;
}

py::list equilibria(const std::string& text, const Overrides& overrides) {
  const RunConfig c = parse_config(text, overrides, std::string("equilibria"));
  const Model model = make_model(c);
  MultistartOptions ms = c.experiment.multistart;
  ms.newton = c.experiment.newton;
  EquilibriumSet set;
  {
    py::gil_scoped_release release;
    set = find_equilibria(model, ms);
  }
  py::list out;
  for (const auto& eq : set.members) {
    py::dict d;
    d["u"] = eq.u_star;
    d["residual"] = eq.residual;
    d["morse_index"] = eq.morse_index;
    d["newton_steps"] = eq.newton_steps;
    if (eq.eigen_data) d["eigenvalues"] = eq.eigen_data->eigenvalues;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Spectral Galerkin lab for damped semilinear wave equations";

  auto base = py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  m.def("version", &version);
  m.def("platform", &platform_fingerprint);
  m.def("experiment_kinds", &experiment_kinds);

  m.def(
      "canonical_config",
      [](const std::string& text, const Overrides& o, const Kind& k) { return canonical(parse_config(text, o, k)); },
      py::arg("text"), py::arg("overrides") = Overrides{}, py::arg("kind") = Kind{},
      "Canonical YAML of a config after overrides and defaults.");
  m.def(
      "evaluate",
      [](const std::string& text, const Overrides& o, const Kind& k) {
        const RunConfig c = parse_config(text, o, k);
        ProbeReport r;
        {
          py::gil_scoped_release release;
          r = evaluate(c);
        }
        return report_dict(r);
      },
      py::arg("text"), py::arg("overrides") = Overrides{}, py::arg("kind") = Kind{},
      "Runs the configured experiment without writing files.");
  m.def(
      "run",
      [](const std::string& text, const Overrides& o, const Kind& k) {
        const RunConfig c = parse_config(text, o, k);
        RunManifest man;
        {
          py::gil_scoped_release release;
          man = run(c);
        }
        return py::make_tuple(exit_code(man), man.to_json());
      },
      py::arg("text"), py::arg("overrides") = Overrides{}, py::arg("kind") = Kind{},
      "Runs the configured experiment into its output directory; returns (exit code, manifest JSON).");
  m.def("simulate", &simulate, py::arg("text") = "", py::arg("overrides") = Overrides{});
  m.def("equilibria", &equilibria, py::arg("text") = "", py::arg("overrides") = Overrides{});
  m.def(
      "read_trace", [](const std::string& path) { return series_dict(read_trace(path)); }, py::arg("path"));
  m.def("sha256_hex", [](const py::bytes& b) { return sha256_hex(std::string(b)); });

  py::class_<SpectralDomain>(m, "Domain")
      .def(py::init([](int dim, int modes, double padding, bool allow_aliasing) {
             return SpectralDomain::build(dim, modes, padding, allow_aliasing);
           }),
           py::arg("dim"), py::arg("modes"), py::arg("padding_factor") = 3.0, py::arg("allow_aliasing") = false)
      .def_property_readonly("dim", &SpectralDomain::dim)
      .def_property_readonly("modes", &SpectralDomain::modes)
      .def_property_readonly("grid_per_axis", &SpectralDomain::grid_per_axis)
      .def_property_readonly("eigenvalues", [](const SpectralDomain& d) { return Eigen::VectorXd(d.eigenvalues()); })
      .def("nodes",
           [](const SpectralDomain& d) {
             Eigen::VectorXd x(d.grid_per_axis());
             for (int j = 1; j <= d.grid_per_axis(); ++j) x[j - 1] = d.node(j);
             return x;
           })
      .def("to_grid", [](const SpectralDomain& d, const Field& f) { return to_grid(d, f); })
      .def("from_grid", [](const SpectralDomain& d, const GridValues& g) { return from_grid(d, g); })
      .def("hs_norm", [](const SpectralDomain& d, const Field& f, double s) { return hs_norm(d, f, s); });
}
