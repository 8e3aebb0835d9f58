#include <map>
#include <string>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "tagsep/analytics.hpp"
#include "tagsep/ctmc_oracle.hpp"
#include "tagsep/errors.hpp"
#include "tagsep/experiments.hpp"
#include "tagsep/rates.hpp"
#include "tagsep/report.hpp"

namespace py = pybind11;
using namespace tagsep;

namespace {

// summary as JSON text plus each table as CSV text
std::pair<std::string, std::map<std::string, std::string>> run_experiment(const std::string& config_json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(config_json);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(e.what());
  }
  const auto cfg = config_from_json(j);
  RunReport rep;
  {
    py::gil_scoped_release release;
    rep = run(cfg);
  }
  std::map<std::string, std::string> tables;
  for (const auto& [name, t] : rep.tables) tables[name] = to_csv(t);
  return {to_json(rep).dump(2), tables};
}

}  // namespace

PYBIND11_MODULE(_tagsep, m) {
  m.doc() = "Driven tagged particle in SSEP with removal: simulation and analytics";

  py::register_exception<RegimeError>(m, "RegimeError", PyExc_ValueError);
  py::register_exception<RadiusExceededError>(m, "RadiusExceededError", PyExc_ArithmeticError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);

  py::class_<Rates>(m, "Rates")
      .def(py::init(&make_rates), py::arg("p1"), py::arg("p2"), py::arg("q1"), py::arg("rho"))
      .def_readonly("p1", &Rates::p1)
      .def_readonly("p2", &Rates::p2)
      .def_readonly("q1", &Rates::q1)
      .def_readonly("rho", &Rates::rho)
      .def("__repr__", [](const Rates& r) {
        return "Rates(p1=" + format_number(r.p1) + ", p2=" + format_number(r.p2) + ", q1=" +
               format_number(r.q1) + ", rho=" + format_number(r.rho) + ")";
      });

  m.def("speed", &speed);
  m.def("drift", &drift);
  m.def("clt_regime", &clt_regime);

  m.def("marginal_solve", [](const Rates& r) {
    const auto s = analytics::marginal_solve(r);
    return py::dict(py::arg("white") = s.nu_w, py::arg("blue") = s.nu_b, py::arg("purple") = s.nu_p);
  });
  m.def("mgf_tb", &analytics::mgf_tb);
  m.def("mgf_tp", &analytics::mgf_tp);
  m.def("mgf_mixture", &analytics::mgf_mixture);
  m.def("g", &analytics::g_of_b);
  m.def("g_prime", &analytics::g_prime);
  m.def("h", &analytics::h_of_b);
  m.def("solve_g", &analytics::solve_g);
  m.def("coupled_params", [](const Rates& r, double b) {
    const auto c = analytics::coupled_params(r, b);
    return py::make_tuple(c.a, c.b, c.c, c.d);
  });
  m.def("expected_tau", &analytics::expected_tau);
  m.def("expected_x_tau", &analytics::expected_x_tau);

  m.def(
      "capped_mgf",
      [](const Rates& r, int cap, double s) {
        const auto chain = oracle::build_capped_chain(r, cap);
        return oracle::exact_mgf_tau(chain, s).mixture;
      },
      py::arg("rates"), py::arg("cap"), py::arg("s"), py::call_guard<py::gil_scoped_release>());
  m.def(
      "capped_marginals",
      [](const Rates& r, int cap) {
        const auto chain = oracle::build_capped_chain(r, cap);
        const auto mg = oracle::exact_capped_marginals(chain);
        return std::map<std::string, double>{{"white", mg.white}, {"blue", mg.blue}, {"purple", mg.purple}};
      },
      py::arg("rates"), py::arg("cap"));

  m.def("experiment_names", &experiment_names);
  m.def("run_experiment", &run_experiment, py::arg("config_json"));
}
