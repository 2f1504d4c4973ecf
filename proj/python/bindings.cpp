#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "weylscope/catalog.hpp"
#include "weylscope/cli.hpp"
#include "weylscope/error.hpp"
#include "weylscope/pipeline.hpp"
#include "weylscope/verify.hpp"
#include "weylscope/weyl.hpp"

namespace py = pybind11;
using namespace weylscope;

namespace {

Box box_of(double lo, double hi) { return Box::cube(lo, hi); }

// pybind11 holders cannot point to const, so metrics travel in a handle
struct Metric {
    MetricPtr ptr;
};

py::dict curvature_at(const Metric& g, const ChartPoint& p) {
    const CurvatureJets c = curvature_jets(*g.ptr, p, 0);
    const CurvatureDecomposition d = decomposition_of(c);
    const WeylSpectrum sp = weyl_spectrum(d.wplus);
    py::dict out;
    out["metric"] = values(c.g);
    out["s"] = d.s;
    out["wplus"] = d.wplus;
    out["wminus"] = d.wminus;
    out["ricci0"] = d.ricci0;
    out["eigenvalues"] = std::array<double, 3>{sp.alpha, sp.beta, sp.gamma};
    out["det"] = sp.det;
    out["gap"] = sp.gap;
    return out;
}

py::dict residual_dict(const ResidualReport& r) {
    py::dict d;
    d["identity"] = r.identity;
    d["residual"] = r.residual;
    d["scale"] = r.scale;
    d["relative"] = r.relative;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Curvature of Riemannian 4-metrics on coordinate charts";
    m.attr("__version__") = cli::kVersion;

    // translators run newest first, so subclasses come after their bases
    auto base = py::register_exception<Error>(m, "Error");
    auto input = py::register_exception<InputError>(m, "InputError", base.ptr());
    auto domain = py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", input.ptr());
    py::register_exception<GapError>(m, "GapError", domain.ptr());

    py::class_<Metric>(m, "Metric")
        .def_property_readonly("name", [](const Metric& g) { return g.ptr->name(); })
        .def_property_readonly("provenance", [](const Metric& g) { return to_string(g.ptr->provenance()); })
        .def_property_readonly("sample_box", [](const Metric& g) { return g.ptr->sample_box().bounds; })
        .def("__repr__", [](const Metric& g) { return "<Metric " + g.ptr->name() + ">"; });

    m.def("catalog_names", [] {
        std::vector<std::string> names;
        for (const auto& e : list_catalog()) names.push_back(e.name);
        return names;
    });
    m.def("catalog", [](const std::string& name) { return Metric{catalog_get(name).metric}; }, py::arg("name"));
    m.def(
        "from_potential",
        [](const std::string& phi, double lo, double hi) {
            return Metric{metric_from_kahler_potential(parse_expression(phi), box_of(lo, hi), phi)};
        },
        py::arg("potential"), py::arg("lo") = -1.0, py::arg("hi") = 1.0);
    m.def(
        "from_components",
        [](const std::array<std::string, 10>& src, double lo, double hi) {
            std::array<Expression, 10> e;
            for (std::size_t i = 0; i < 10; ++i) e[i] = parse_expression(src[i]);
            return Metric{metric_from_components(e, box_of(lo, hi))};
        },
        py::arg("components"), py::arg("lo") = -1.0, py::arg("hi") = 1.0,
        "Components g00 g01 g02 g03 g11 g12 g13 g22 g23 g33.");
    m.def(
        "conformal_rescale", [](const Metric& h, const std::string& f) { return Metric{conformal_rescale(h.ptr, scalar_from_source(f))}; },
        py::arg("h"), py::arg("f"), "g = f^-2 h.");
    m.def("derdzinski", [](const Metric& g) { return Metric{derdzinski(g.ptr)}; }, py::arg("g"));
    m.def("rescale_to_g", [](const Metric& h) { return Metric{rescale_to_g(h.ptr)}; }, py::arg("h"));

    m.def("curvature", &curvature_at, py::arg("g"), py::arg("point"));
    m.def("divergence_weyl", [](const Metric& g, const ChartPoint& p) { return residual_dict(divergence_weyl(*g.ptr, p)); },
          py::arg("g"), py::arg("point"));
    m.def("kahler_residual", [](const Metric& g, const ChartPoint& p) { return kahler_residual(*g.ptr, p).norm; },
          py::arg("g"), py::arg("point"));
    m.def("threshold", &det_threshold);
    m.def(
        "oracle",
        [](std::uint64_t seed, std::uint64_t n, int threads) {
            const OracleReport r = random_spectrum_oracle(seed, n, threads);
            py::dict d;
            d["samples"] = r.samples;
            d["passed"] = r.passed();
            d["counterexamples"] = r.counterexamples.size();
            d["max_norm_identity_defect"] = r.max_norm_identity_defect;
            return d;
        },
        py::arg("seed"), py::arg("n"), py::arg("threads") = 1);
    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = cli::run(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command line tool in process; returns (exit code, stdout, stderr).");
}
