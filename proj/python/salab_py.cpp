#include "salab/acceptance.hpp"
#include "salab/config.hpp"
#include "salab/errors.hpp"
#include "salab/fitting.hpp"
#include "salab/harness.hpp"
#include "salab/intro_example.hpp"
#include "salab/linalg.hpp"
#include "salab/nilpotent.hpp"
#include "salab/spectral.hpp"

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;

namespace {

salab::IntroParams params(std::complex<double> a, std::complex<double> k) {
    return {a, k};
}

std::string run(const std::string& command, const std::string& config_text) {
    const salab::ExperimentConfig c = salab::parse_config(config_text);
    const salab::RunOptions o = salab::options_from_environment();
    nlohmann::json r;
    if (command == "decompose") {
        r = salab::run_decompose(c, o);
    } else if (command == "evolve") {
        r = salab::run_evolve(c, o);
    } else if (command == "superadiabatic") {
        r = salab::run_superadiabatic_scan(c, o);
    } else if (command == "nilpotent") {
        r = salab::run_nilpotent_scan(c, o);
    } else if (command == "example") {
        r = salab::run_intro_example(c, o);
    } else {
        salab::fail(salab::ErrorKind::Config, "unknown command '" + command + "'");
    }
    return r.dump();
}

} // namespace

PYBIND11_MODULE(_salab, m) {
    m.doc() = "Superadiabatic evolution lab: native core";

    static py::exception<salab::Error> error(m, "SalabError");
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) {
                std::rethrow_exception(p);
            }
        } catch (const salab::Error& e) {
            error(e.what());
        }
    });

    m.def("expm", &salab::expm, py::arg("m"));
    m.def("operator_norm", &salab::operator_norm, py::arg("m"));

    m.def(
        "decompose",
        [](const salab::Matrix& h, double gap_floor) {
            const auto d = salab::decompose(h, gap_floor);
            py::list groups;
            for (const auto& g : d.groups) {
                py::dict item;
                item["eigenvalue"] = g.eigenvalue;
                item["multiplicity"] = g.multiplicity;
                item["projector"] = g.projector;
                item["nilpotent"] = g.nilpotent;
                groups.append(item);
            }
            return groups;
        },
        py::arg("h"), py::arg("gap_floor") = 0.5);

    m.def(
        "contour_projector",
        [](const salab::Matrix& h, std::complex<double> center, double radius) {
            return salab::contour_projector(h, salab::Contour{center, radius, 16});
        },
        py::arg("h"), py::arg("center"), py::arg("radius"));

    m.def(
        "closed_form_transition",
        [](std::complex<double> a, std::complex<double> k, double eps, double t) {
            const auto v = salab::closed_form_transition(params(a, k), eps, t);
            return py::make_tuple(v.value, v.log_scale);
        },
        py::arg("a"), py::arg("k"), py::arg("epsilon"), py::arg("t"));

    m.def(
        "numerical_transition",
        [](std::complex<double> a, std::complex<double> k, double eps, double t, double tol) {
            const auto v = salab::numerical_transition(params(a, k), eps, t, tol);
            return py::make_tuple(v.value, v.log_scale);
        },
        py::arg("a"), py::arg("k"), py::arg("epsilon"), py::arg("t"), py::arg("tol") = 1e-10);

    m.def(
        "closed_form_omega",
        [](std::complex<double> a, std::complex<double> k, double eps, double t) {
            const auto v = salab::closed_form_omega(params(a, k), eps, t);
            return py::make_tuple(v.value, v.log_scale);
        },
        py::arg("a"), py::arg("k"), py::arg("epsilon"), py::arg("t"));

    m.def("example_nilpotent_solution", &salab::example_nilpotent_solution, py::arg("epsilon"), py::arg("t"));

    m.def(
        "fit",
        [](const std::vector<double>& eps, const std::vector<double>& values, std::vector<double> log_scales,
           const std::string& model) {
            if (log_scales.empty()) {
                log_scales.assign(eps.size(), 0.0);
            }
            if (values.size() != eps.size() || log_scales.size() != eps.size()) {
                salab::fail(salab::ErrorKind::DimensionMismatch, "fit: series lengths differ");
            }
            std::vector<salab::SeriesPoint> series;
            for (std::size_t i = 0; i < eps.size(); ++i) {
                series.push_back({eps[i], values[i], log_scales[i]});
            }
            return salab::sanitize(salab::fit(series, salab::parse_growth_model(model)).to_json()).dump();
        },
        py::arg("epsilon"), py::arg("values"), py::arg("log_scales") = std::vector<double>{},
        py::arg("model") = "exp_inverse_eps");

    m.def("run", &run, py::arg("command"), py::arg("config_text"), py::call_guard<py::gil_scoped_release>());
    m.def(
        "run_criterion", [](int id) { return salab::run_criterion(id).to_json().dump(); }, py::arg("id"),
        py::call_guard<py::gil_scoped_release>());
}
