#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pecurves/commands.hpp"
#include "pecurves/errors.hpp"
#include "pecurves/fibering.hpp"

namespace py = pybind11;

namespace {

pec::RayData ray(double n, double a, double b, double alpha, double eta, double beta) {
    pec::Exponents e{alpha, eta, beta};
    e.validate();
    return pec::RayData{n, a, b, e};
}

py::dict profile_dict(const pec::FiberingProfile& p) {
    py::dict d;
    d["kind"] = pec::to_string(p.kind);
    d["t_plus"] = p.t_plus;
    d["t_minus"] = p.t_minus;
    d["phi_plus"] = p.phi_plus;
    d["phi_minus"] = p.phi_minus;
    d["extremal_c"] = p.extremal_c;
    d["zero_level_c"] = p.zero_level_c;
    d["degenerate"] = p.degenerate;
    return d;
}

// Holds a parsed config and the discretized instance built from it.
class Experiment {
public:
    explicit Experiment(const std::string& config_json)
        : cfg_(pec::ExperimentConfig::from_json(nlohmann::json::parse(config_json))), built_(pec::build_problem(cfg_)) {}

    std::string config() const { return cfg_.to_json().dump(); }
    std::size_t dim() const { return built_.instance.triple.dim(); }

    std::string thresholds() const { return pec::cmd_thresholds(cfg_).to_json(false).dump(); }
    std::string solve(double c, const std::string& branch, int k) const {
        return pec::cmd_solve(cfg_, c, pec::parse_branch(branch), k).to_json(false).dump();
    }
    std::string trace() const { return pec::cmd_trace(cfg_).to_json(false).dump(); }
    std::string verify() const { return pec::cmd_verify(cfg_).to_json(false).dump(); }
    std::string trace_csv() const { return pec::curves_csv(pec::cmd_trace(cfg_).curves); }

    std::tuple<double, double, double> evaluate(const std::vector<double>& u) const {
        check(u);
        const auto v = built_.instance.triple.evaluate(u);
        return {v.n, v.a, v.b};
    }
    double phi(double lambda, const std::vector<double>& u) const {
        check(u);
        return pec::phi(built_.instance.triple, lambda, u);
    }
    std::vector<double> phi_grad(double lambda, const std::vector<double>& u) const {
        check(u);
        return pec::phi_grad(built_.instance.triple, lambda, u);
    }
    double lambda_of(double c, const std::vector<double>& u) const {
        check(u);
        return pec::lambda_of(built_.instance.triple, c, u);
    }

private:
    void check(const std::vector<double>& u) const {
        if (u.size() != dim())
            throw pec::DomainError("vector has " + std::to_string(u.size()) + " entries, the instance has " +
                                   std::to_string(dim()) + " unknowns");
    }

    pec::ExperimentConfig cfg_;
    pec::BuiltProblem built_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "prescribed-energy curves for concave-convex problems";

    auto base = py::register_exception<pec::Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<pec::ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<pec::DomainError>(m, "DomainError", base.ptr());
    py::register_exception<pec::NumericalError>(m, "NumericalError", base.ptr());

    m.def(
        "classify_and_solve",
        [](double n, double a, double b, double c, double alpha, double eta, double beta) {
            return profile_dict(pec::classify_and_solve(ray(n, a, b, alpha, eta, beta), c));
        },
        py::arg("n"), py::arg("a"), py::arg("b"), py::arg("c"), py::arg("alpha") = 1.5, py::arg("eta") = 2.0,
        py::arg("beta") = 4.0, "Case and Nehari roots of the fibering map on a ray with values (n, a, b).");
    m.def(
        "fibering_value",
        [](double n, double a, double b, double c, double t, double alpha, double eta, double beta) {
            return pec::fibering_value(ray(n, a, b, alpha, eta, beta), c, t);
        },
        py::arg("n"), py::arg("a"), py::arg("b"), py::arg("c"), py::arg("t"), py::arg("alpha") = 1.5,
        py::arg("eta") = 2.0, py::arg("beta") = 4.0);
    m.def(
        "extremal_pair",
        [](double n, double a, double b, double alpha, double eta, double beta) {
            const auto p = pec::extremal_pair(ray(n, a, b, alpha, eta, beta));
            return std::make_pair(p.t, p.c);
        },
        py::arg("n"), py::arg("a"), py::arg("b"), py::arg("alpha") = 1.5, py::arg("eta") = 2.0, py::arg("beta") = 4.0);
    m.def(
        "zero_level_pair",
        [](double n, double a, double b, double alpha, double eta, double beta) {
            const auto p = pec::zero_level_pair(ray(n, a, b, alpha, eta, beta));
            return std::make_pair(p.t, p.c);
        },
        py::arg("n"), py::arg("a"), py::arg("b"), py::arg("alpha") = 1.5, py::arg("eta") = 2.0, py::arg("beta") = 4.0);
    m.def("csv_header", [] { return std::string(pec::kCsvHeader); });

    py::class_<Experiment>(m, "_Experiment")
        .def(py::init<const std::string&>(), py::arg("config_json"))
        .def("config", &Experiment::config)
        .def_property_readonly("dim", &Experiment::dim)
        .def("thresholds", &Experiment::thresholds, py::call_guard<py::gil_scoped_release>())
        .def("solve", &Experiment::solve, py::arg("c"), py::arg("branch") = "plus", py::arg("k") = 1,
             py::call_guard<py::gil_scoped_release>())
        .def("trace", &Experiment::trace, py::call_guard<py::gil_scoped_release>())
        .def("trace_csv", &Experiment::trace_csv, py::call_guard<py::gil_scoped_release>())
        .def("verify", &Experiment::verify, py::call_guard<py::gil_scoped_release>())
        .def("evaluate", &Experiment::evaluate, py::arg("u"))
        .def("phi", &Experiment::phi, py::arg("lam"), py::arg("u"))
        .def("phi_grad", &Experiment::phi_grad, py::arg("lam"), py::arg("u"))
        .def("lambda_of", &Experiment::lambda_of, py::arg("c"), py::arg("u"));
}
