#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "crtassure/errors.hpp"
#include "crtassure/io.hpp"
#include "crtassure/power.hpp"
#include "crtassure/priors.hpp"
#include "crtassure/runner.hpp"

namespace py = pybind11;
using namespace crtassure;

namespace {

WaldTest make_test(double alpha, const std::string& sided) {
    return WaldTest{alpha, parse_sidedness(sided)};
}

/// Runs one operation on a scenario given as JSON text or a preset name.
std::string run_json(const std::string& operation, const std::string& scenario) {
    io::json doc;
    std::string base_dir = ".";
    const auto first = scenario.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && scenario[first] == '{') {
        doc = io::json::parse(scenario);
    } else {
        doc = io::load_scenario_json(scenario, &base_dir);
    }
    const auto result = run::run_operation(operation, io::scenario_from_json(doc, base_dir));
    return io::result_to_json(result).dump();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Power, assurance and sample size for cluster randomised trials";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<InfeasibleDesign>(m, "InfeasibleDesign", PyExc_RuntimeError);
    py::register_exception<SearchLimitExceeded>(m, "SearchLimitExceeded", PyExc_RuntimeError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    m.def(
        "power",
        [](double delta, double sigma, double rho, double nu, int clusters, double n_bar,
           double alpha, const std::string& sided) {
            return power(delta, NuisanceParams{sigma, rho, nu}, clusters, n_bar,
                         make_test(alpha, sided));
        },
        py::arg("delta"), py::arg("sigma"), py::arg("rho"), py::arg("nu"), py::arg("clusters"),
        py::arg("n_bar"), py::arg("alpha") = 0.05, py::arg("sided") = "two",
        "Power of the Wald test at fixed (sigma, rho, nu).");
    m.def(
        "power_limit",
        [](double delta, double sigma, double rho, double nu, int clusters, double alpha,
           const std::string& sided) {
            return power_limit(delta, NuisanceParams{sigma, rho, nu}, clusters,
                               make_test(alpha, sided));
        },
        py::arg("delta"), py::arg("sigma"), py::arg("rho"), py::arg("nu"), py::arg("clusters"),
        py::arg("alpha") = 0.05, py::arg("sided") = "two",
        "Supremum of power over the cluster size at C clusters.");
    m.def("design_effect", &design_effect, py::arg("n_bar"), py::arg("rho"), py::arg("nu"));
    m.def(
        "gamma_from_mean_var",
        [](double mean, double variance) {
            const auto g = gamma_from_mean_var(mean, variance);
            return py::make_tuple(g.shape, g.rate);
        },
        py::arg("mean"), py::arg("variance"), "(shape, rate) of a gamma with this mean and variance.");
    m.def(
        "fit_icc",
        [](double median, double lo95, double hi95) {
            const auto l = fit_icc_from_quantiles(median, lo95, hi95);
            return py::make_tuple(l.mu, l.sigma_logit);
        },
        py::arg("median"), py::arg("lo95"), py::arg("hi95"),
        "(mu, sigma_logit) of the logit-normal ICC prior fitted to a median and 95% interval.");
    m.def("run_json", &run_json, py::arg("operation"), py::arg("scenario"),
          py::call_guard<py::gil_scoped_release>());
    m.def("preset_names", [] {
        std::vector<std::string> names;
        for (const auto& p : io::bundled_presets()) names.emplace_back(p.name);
        return names;
    });
    m.def(
        "load_scenario_json",
        [](const std::string& path_or_preset) {
            return io::load_scenario_json(path_or_preset).dump();
        },
        py::arg("path_or_preset"));
    m.attr("operations") = std::vector<std::string>(std::begin(run::kOperations), std::end(run::kOperations));
}
