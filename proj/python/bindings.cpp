#include <algorithm>

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "selfosc/config.hpp"
#include "selfosc/dynamics.hpp"
#include "selfosc/errors.hpp"
#include "selfosc/kernels.hpp"
#include "selfosc/run.hpp"
#include "selfosc/scenarios.hpp"
#include "selfosc/transport.hpp"

namespace py = pybind11;
using namespace selfosc;

namespace {

py::array_t<double> array(const std::vector<double>& v) {
  py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

py::dict observables(const ResultBundle& b) {
  py::dict out;
  for (const auto& o : b.observables)
    out[py::str(o.name)] = py::dict(py::arg("value") = o.value, py::arg("window_lo") = o.window_lo,
                                    py::arg("window_hi") = o.window_hi,
                                    py::arg("tolerance") = o.tolerance, py::arg("status") = o.status);
  return out;
}

py::dict bundle(const ResultBundle& b) {
  return py::dict(py::arg("directory") = b.directory, py::arg("files") = b.files,
                  py::arg("passed") = b.passed(), py::arg("observables") = observables(b));
}

}  // namespace

PYBIND11_MODULE(_selfosc, m) {
  m.doc() = "Occupation dynamics of an oscillator coupled to fermionic and bosonic baths";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

  py::enum_<Statistics>(m, "Statistics")
      .value("fermionic", Statistics::Fermionic)
      .value("bosonic", Statistics::Bosonic);

  py::class_<BathSpec>(m, "Bath")
      .def(py::init([](const std::string& statistics, double alpha, double gamma, double T) {
             return BathSpec{statistics_from_string(statistics), alpha, gamma, T};
           }),
           py::arg("statistics"), py::arg("alpha"), py::arg("gamma"), py::arg("temperature"))
      .def_readwrite("statistics", &BathSpec::statistics)
      .def_readwrite("alpha", &BathSpec::alpha)
      .def_readwrite("gamma", &BathSpec::gamma)
      .def_readwrite("temperature", &BathSpec::temperature);

  py::class_<SystemSpec>(m, "System")
      .def(py::init(&make_system), py::arg("Omega"), py::arg("bath1"), py::arg("bath2"))
      .def_property_readonly("Omega", &SystemSpec::Omega)
      .def_property_readonly("omega", &SystemSpec::omega)
      .def_property_readonly("mode", [](const SystemSpec& s) { return to_string(s.mode()); })
      .def_property_readonly("baths", [](const SystemSpec& s) {
        return std::vector<BathSpec>(s.baths.begin(), s.baths.end());
      });

  m.def("roots", [](const SystemSpec& s) {
    const auto rs = characteristic_roots(s);
    return std::vector<cdouble>(rs.roots.begin(), rs.roots.end());
  }, "Characteristic roots sorted by (real, imag).");
  m.def("equilibrium_occupation", &equilibrium_occupation, py::arg("w"), py::arg("T"),
        py::arg("statistics"));
  m.def("markovian_asymptote", &markovian_asymptote);
  m.def("asymptotic_occupation", [](const SystemSpec& s) { return asymptotic_occupation(s); },
        "t -> infinity occupation of a same-statistics system.");

  py::class_<CoefficientSeries>(m, "Coefficients")
      .def_property_readonly("t", [](const CoefficientSeries& c) { return array(c.time); })
      .def_property_readonly("lam", [](const CoefficientSeries& c) { return array(c.lambda); })
      .def_property_readonly("D", [](const CoefficientSeries& c) { return array(c.diffusion); })
      .def_property_readonly("ratio", [](const CoefficientSeries& c) { return array(c.ratio); })
      .def_property_readonly("I1", [](const CoefficientSeries& c) { return array(c.bath_integrals[0]); })
      .def_property_readonly("I2", [](const CoefficientSeries& c) { return array(c.bath_integrals[1]); })
      .def("__len__", &CoefficientSeries::size);

  m.def("coefficients",
        [](const SystemSpec& s, double t_max, double dt, double rtol, unsigned workers) {
          TransportOptions o;
          o.quadrature_rtol = rtol;
          o.workers = workers;
          py::gil_scoped_release release;
          return compute_coefficients(s, TimeGrid::covering(t_max, dt), o);
        },
        py::arg("system"), py::arg("t_max"), py::arg("dt") = 0.005, py::arg("rtol") = 1e-7,
        py::arg("workers") = 1);

  m.def("evolve",
        [](const CoefficientSeries& c, double n0, double t_max) {
          const auto tr = evolve_single(c, n0, t_max);
          return py::make_tuple(array(tr.time), array(tr.n[0]));
        },
        py::arg("coefficients"), py::arg("n0"), py::arg("t_max"),
        "Returns (t, n) for dn/dt = -2 lambda n + 2 D.");

  m.def("scenario_names", &scenario_names);
  m.def("run_scenario",
        [](const std::string& name, const std::filesystem::path& out, double t_max, double dt) {
          auto c = make_scenario(name).config;
          if (t_max > 0.0) c.t_max = t_max;
          if (dt > 0.0) c.dt = dt;
          py::gil_scoped_release release;
          return run_scenario(c, out);
        },
        py::arg("name"), py::arg("out"), py::arg("t_max") = 0.0, py::arg("dt") = 0.0);
  m.def("run_validate",
        [](const std::string& config_text, const std::filesystem::path& out, bool lambda_sign) {
          const auto c = parse_config_text(config_text);
          py::gil_scoped_release release;
          return run_validate(c, out, lambda_sign ? Fault::LambdaSign : Fault::None);
        },
        py::arg("config_text"), py::arg("out"), py::arg("inject_lambda_sign") = false);
  m.def("parse_config", [](const std::string& text) { return serialize_config(parse_config_text(text)); },
        "Validates config text and returns its normalized form.");

  py::class_<ResultBundle>(m, "Result")
      .def_property_readonly("passed", &ResultBundle::passed)
      .def_property_readonly("directory", [](const ResultBundle& b) { return b.directory; })
      .def_property_readonly("files", [](const ResultBundle& b) { return b.files; })
      .def_property_readonly("observables", &observables)
      .def("as_dict", &bundle);
}
