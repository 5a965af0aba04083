#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "speccav/analysis.hpp"
#include "speccav/cavity.hpp"
#include "speccav/errors.hpp"
#include "speccav/graph.hpp"
#include "speccav/harness.hpp"
#include "speccav/power.hpp"

namespace py = pybind11;
using namespace speccav;

namespace {

py::array_t<double> to_array(std::vector<double> const& v)
{
    py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

std::vector<double> from_array(py::array_t<double, py::array::c_style | py::array::forcecast> const& a)
{
    return {a.data(), a.data() + a.size()};
}

py::dict fit_dict(ScalingFit const& f)
{
    py::dict d;
    d["A"] = f.A;
    d["B"] = f.B;
    d["beta"] = f.beta;
    d["sse"] = f.sse;
    d["lambda_infinity"] = f.lambda_infinity;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "First eigenpair of random sparse symmetric matrices.";
    m.attr("__version__") = version();

    auto numerical = py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
    py::register_exception<NoConvergence>(m, "NoConvergence", numerical.ptr());
    py::register_exception<RestartLimitExceeded>(m, "RestartLimitExceeded", numerical.ptr());
    py::register_exception<DivergedPopulation>(m, "DivergedPopulation", numerical.ptr());
    py::register_exception<EdgeNotBracketed>(m, "EdgeNotBracketed", numerical.ptr());
    py::register_exception<NonMonotoneStatistic>(m, "NonMonotoneStatistic", numerical.ptr());
    py::register_exception<DegenerateFit>(m, "DegenerateFit", numerical.ptr());
    py::register_exception<InsufficientTailSamples>(m, "InsufficientTailSamples", numerical.ptr());
    py::register_exception<AllZeroInput>(m, "AllZeroInput", numerical.ptr());

    py::class_<DegreeSpec>(m, "DegreeSpec")
        .def(py::init(&DegreeSpec::parse), py::arg("text"))
        .def_static("two_point", &DegreeSpec::two_point, py::arg("k_small"), py::arg("k_large"), py::arg("ratio_small"))
        .def_static("truncated_poisson", &DegreeSpec::truncated_poisson, py::arg("rate"), py::arg("k_max"))
        .def_static("regular", &DegreeSpec::regular, py::arg("k"))
        .def("pk", &DegreeSpec::pk, py::arg("k"))
        .def_property_readonly("mean", &DegreeSpec::mean)
        .def_property_readonly("k_max", &DegreeSpec::k_max)
        .def("__str__", &DegreeSpec::to_string)
        .def("__repr__", [](DegreeSpec const& s) { return "DegreeSpec('" + s.to_string() + "')"; });

    py::class_<GraphInstance>(m, "Graph")
        .def_property_readonly("n", &GraphInstance::size)
        .def_property_readonly("delta", &GraphInstance::delta)
        .def_property_readonly("seed", &GraphInstance::seed)
        .def_property_readonly("degrees", &GraphInstance::degrees)
        .def_property_readonly("edges",
                               [](GraphInstance const& g) {
                                   std::vector<std::tuple<std::uint32_t, std::uint32_t, int>> out;
                                   for (auto const& e : g.edges())
                                       out.emplace_back(e.i, e.j, e.coupling);
                                   return out;
                               })
        .def("__len__", &GraphInstance::size)
        .def("__str__", &graph_to_string);

    m.def(
        "generate_graph",
        [](DegreeSpec const& spec, std::size_t n, double delta, std::uint64_t seed, int max_restarts) {
            py::gil_scoped_release release;
            return generate_graph(spec, n, delta, seed, max_restarts);
        },
        py::arg("spec"), py::arg("n"), py::arg("delta"), py::arg("seed"), py::arg("max_restarts") = 100);

    m.def(
        "first_eigenpair",
        [](GraphInstance const& g, bool laplacian, double tol, std::uint64_t seed) {
            PowerOptions po;
            po.tol = tol;
            Rng rng(derive_seed(seed, "power-start"));
            EigenResult r;
            {
                py::gil_scoped_release release;
                r = laplacian ? power_iterate(build_laplacian(g), po, rng) : power_iterate(g, po, rng);
            }
            return py::make_tuple(r.lambda_1, to_array(r.vector), r.iterations);
        },
        py::arg("graph"), py::arg("laplacian") = false, py::arg("tol") = 1e-10, py::arg("seed") = 0,
        "Returns (lambda1, unit eigenvector, iterations).");

    m.def(
        "ensemble_first_eigenvalues",
        [](DegreeSpec const& spec, std::size_t n, double delta, std::size_t count, std::uint64_t seed,
           bool laplacian, int workers) {
            EnsembleOptions o;
            o.variant = laplacian ? MatrixVariant::laplacian : MatrixVariant::adjacency;
            o.workers = workers;
            EnsembleResult r;
            {
                py::gil_scoped_release release;
                r = ensemble_first_eigenvalues(spec, n, delta, count, seed, o);
            }
            return to_array(r.lambdas());
        },
        py::arg("spec"), py::arg("n"), py::arg("delta"), py::arg("count"), py::arg("seed"),
        py::arg("laplacian") = false, py::arg("workers") = 1);

    m.def(
        "find_lambda",
        [](DegreeSpec const& spec, double delta, bool laplacian, std::string const& criterion, std::size_t n_pop,
           int burn_in, int measure, double tol_lambda, std::size_t samples, std::uint64_t seed) {
            PopulationTemplate tmpl{spec, delta, laplacian ? MatrixVariant::laplacian : MatrixVariant::adjacency};
            PopulationOptions o;
            o.n_pop = n_pop;
            o.burn_in = burn_in;
            o.measure = measure;
            o.tol_lambda = tol_lambda;
            LambdaSearchResult r;
            MarginalSamples s;
            {
                py::gil_scoped_release release;
                auto [lo, hi] = default_lambda_window(spec, tmpl.variant);
                r = find_lambda(tmpl, lo, hi, parse_criterion(criterion), o, seed);
                r.population->orient();
                Rng rng(derive_seed(seed, "marginals"));
                s = sample_marginals(*r.population, samples, rng);
            }
            py::dict d;
            d["lambda_hat"] = r.lambda_hat;
            d["edge_limited"] = r.edge_limited;
            d["trials"] = r.trials.size();
            d["h_growth"] = r.trials.back().h_growth;
            d["v"] = to_array(s.v);
            d["degree"] = s.degree;
            return d;
        },
        py::arg("spec"), py::arg("delta"), py::arg("laplacian") = false, py::arg("criterion") = "growth_rate",
        py::arg("n_pop") = 20000, py::arg("burn_in") = 200, py::arg("measure") = 100, py::arg("tol_lambda") = 1e-3,
        py::arg("samples") = 100000, py::arg("seed") = 1);

    m.def(
        "fit_scaling",
        [](std::vector<double> const& sizes, std::vector<double> const& lambdas) {
            if (sizes.size() != lambdas.size())
                throw std::invalid_argument("sizes and lambdas differ in length");
            std::vector<std::pair<double, double>> pts;
            for (std::size_t i = 0; i < sizes.size(); ++i)
                pts.emplace_back(sizes[i], lambdas[i]);
            return fit_dict(fit_scaling(pts));
        },
        py::arg("sizes"), py::arg("lambdas"));

    m.def(
        "fit_tail",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> const& values,
           std::pair<double, double> window) {
            auto f = fit_tail(from_array(values), window);
            py::dict d;
            d["alpha"] = f.alpha;
            d["slope"] = f.slope;
            d["fit_window"] = f.fit_window;
            d["r_squared"] = f.r_squared;
            d["points"] = f.points;
            return d;
        },
        py::arg("values"), py::arg("window") = std::pair<double, double>{0.9, 0.999});

    m.def(
        "normalize",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> const& values, std::string const& mode) {
            return to_array(normalize(from_array(values), parse_normalization(mode)));
        },
        py::arg("values"), py::arg("mode") = "variance_unit");

    m.def(
        "histogram",
        [](py::array_t<double, py::array::c_style | py::array::forcecast> const& values, double width,
           double origin) {
            auto d = histogram(from_array(values), width, NormalizationMode::raw, {}, origin);
            std::vector<double> centers, density;
            std::vector<std::int64_t> counts;
            for (std::int64_t b = d.first_bin; !d.counts.empty() && b <= d.last_bin(); ++b)
            {
                centers.push_back(d.bin_center(b));
                density.push_back(d.density_at(b));
                counts.push_back(d.count_at(b));
            }
            py::dict out;
            out["bin_center"] = to_array(centers);
            out["density"] = to_array(density);
            out["count"] = counts;
            out["total"] = d.total;
            return out;
        },
        py::arg("values"), py::arg("bin_width"), py::arg("origin") = 0.0);

    m.def(
        "run_experiment",
        [](std::string const& config_json, int workers, std::size_t n_pop, int burn_in, int measure,
           std::size_t samples) {
            auto cfg = parse_config(config_json);
            RunOptions ro;
            ro.workers = workers;
            ro.population.n_pop = n_pop;
            ro.population.burn_in = burn_in;
            ro.population.measure = measure;
            ro.marginal_samples = samples;
            py::gil_scoped_release release;
            return run_experiment(cfg, ro).to_json();
        },
        py::arg("config_json"), py::arg("workers") = 1, py::arg("n_pop") = 20000, py::arg("burn_in") = 200,
        py::arg("measure") = 100, py::arg("samples") = 200000, "Runs a recipe; returns the manifest as JSON text.");
}
