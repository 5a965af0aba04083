#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "speccav/analysis.hpp"
#include "speccav/cavity.hpp"
#include "speccav/errors.hpp"
#include "speccav/format.hpp"
#include "speccav/graph.hpp"
#include "speccav/harness.hpp"
#include "speccav/power.hpp"

using namespace speccav;

namespace {

struct Common
{
    std::uint64_t seed = 1;
    bool seed_given = false;
    std::string out;
    bool quiet = false;
};

void add_common(CLI::App* app, Common& c)
{
    app->add_option("--seed", c.seed, "Random seed")->each([&c](std::string const&) { c.seed_given = true; });
    app->add_option("--out", c.out, "Output file");
    app->add_flag("--quiet", c.quiet, "Suppress progress notes on stderr");
}

void note(Common const& c, std::string const& msg)
{
    if (!c.quiet)
        std::cerr << msg << '\n';
}

std::ofstream open_out(std::string const& path)
{
    std::ofstream os(path);
    if (!os)
        throw std::invalid_argument("cannot write '" + path + "'");
    return os;
}

// One numeric column from a text file: a bare list, or CSV with a header row
// in which case `column` selects the field.
std::vector<double> read_column(std::string const& path, std::string const& column)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open '" + path + "'");
    std::vector<double> out;
    std::string line;
    long index = -1;
    bool first = true;
    while (std::getline(in, line))
    {
        if (line.empty())
            continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string f;
        while (std::getline(ss, f, ','))
            fields.push_back(f);
        if (first)
        {
            first = false;
            char* end = nullptr;
            std::strtod(fields[0].c_str(), &end);
            if (end == fields[0].c_str())
            {
                for (std::size_t i = 0; i < fields.size(); ++i)
                    if (fields[i] == column)
                        index = static_cast<long>(i);
                if (index < 0)
                    throw std::invalid_argument("column '" + column + "' not found in '" + path + "'");
                continue;
            }
            index = 0;
        }
        if (static_cast<std::size_t>(index) >= fields.size() || fields[index].empty())
            continue;
        out.push_back(std::stod(fields[index]));
    }
    return out;
}

int cmd_gen(std::string const& spec_text, std::size_t n, double delta, int max_restarts, Common const& c)
{
    auto spec = DegreeSpec::parse(spec_text);
    auto g = generate_graph(spec, n, delta, c.seed, max_restarts);
    if (!c.out.empty())
        save_graph(c.out, g);
    else
        note(c, "no --out given; graph not written");
    std::cout << "n=" << g.size() << " edges=" << g.edges().size() << " delta=" << format_shortest(delta) << '\n';
    return 0;
}

GraphInstance graph_from(std::string const& path,
                         std::string const& spec_text,
                         std::size_t n,
                         double delta,
                         Common const& c)
{
    if (!path.empty())
        return load_graph(path);
    if (spec_text.empty() || n == 0)
        throw std::invalid_argument("give --graph, or --spec with --n");
    return generate_graph(DegreeSpec::parse(spec_text), n, delta, c.seed);
}

int cmd_power(GraphInstance const& g, bool laplacian, PowerOptions const& po, Common const& c)
{
    Rng rng(derive_seed(c.seed_given ? c.seed : g.seed(), "power-start"));
    auto r = laplacian ? power_iterate(build_laplacian(g), po, rng) : power_iterate(g, po, rng);
    if (!c.out.empty())
    {
        auto os = open_out(c.out);
        os << "i,v,degree\n";
        for (std::size_t i = 0; i < r.vector.size(); ++i)
            os << i << ',' << format_g17(r.vector[i]) << ',' << g.degrees()[i] << '\n';
    }
    std::cout << "lambda1=" << format_g17(r.lambda_1) << " iterations=" << r.iterations
              << " residual=" << format_shortest(r.residual) << " eta=" << format_shortest(r.shift_eta) << '\n';
    return 0;
}

int cmd_cavity_instance(GraphInstance const& g, bool laplacian, double lambda, double tol, long max_sweeps,
                        Common const& c)
{
    Rng rng(c.seed);
    auto run = [&](InstanceMessages msgs) {
        long sweeps = converge_instance(msgs, tol, max_sweeps);
        if (!c.out.empty())
        {
            auto os = open_out(c.out);
            auto v = msgs.eigenvector_estimate();
            os << "i,A,H,v,degree\n";
            for (std::size_t i = 0; i < v.size(); ++i)
                os << i << ',' << format_g17(msgs.node_A()[i]) << ',' << format_g17(msgs.node_H()[i]) << ','
                   << format_g17(v[i]) << ',' << g.degrees()[i] << '\n';
        }
        std::cout << "lambda=" << format_shortest(lambda) << " sweeps=" << sweeps
                  << " h_growth=" << format_g17(msgs.h_growth()) << '\n';
    };
    if (laplacian)
        run(InstanceMessages(build_laplacian(g), lambda, rng));
    else
        run(InstanceMessages(g, lambda, rng));
    return 0;
}

struct PopArgs
{
    std::string spec;
    double delta = 0;
    bool laplacian = false;
    std::string criterion = "growth_rate";
    double lo = std::numeric_limits<double>::quiet_NaN();
    double hi = std::numeric_limits<double>::quiet_NaN();
    std::string strategy = "sequential";
    std::size_t samples = 200000;
    std::string population_out;
    std::string trials_out;
    PopulationOptions opts;
};

int cmd_cavity_pop(PopArgs a, Common const& c)
{
    PopulationTemplate tmpl{DegreeSpec::parse(a.spec), a.delta,
                            a.laplacian ? MatrixVariant::laplacian : MatrixVariant::adjacency};
    if (a.strategy == "parallel")
        a.opts.strategy = UpdateStrategy::parallel;
    else if (a.strategy != "sequential")
        throw std::invalid_argument("strategy must be sequential or parallel");
    auto [lo, hi] = default_lambda_window(tmpl.spec, tmpl.variant);
    if (!std::isnan(a.lo))
        lo = a.lo;
    if (!std::isnan(a.hi))
        hi = a.hi;
    note(c, "searching lambda in [" + format_shortest(lo) + ", " + format_shortest(hi) + "]");
    auto res = find_lambda(tmpl, lo, hi, parse_criterion(a.criterion), a.opts, c.seed);
    auto& pop = *res.population;
    pop.orient();
    Rng rng(derive_seed(c.seed, "marginals"));
    auto s = sample_marginals(pop, a.samples, rng);

    double alpha = std::numeric_limits<double>::quiet_NaN();
    try
    {
        alpha = fit_tail(s.v).alpha;
    }
    catch (InsufficientTailSamples const&)
    {
        note(c, "too few samples for a tail fit");
    }
    if (!c.out.empty())
    {
        auto os = open_out(c.out);
        os << "A,H,v,degree\n";
        for (std::size_t i = 0; i < s.v.size(); ++i)
            os << format_g17(s.A[i]) << ',' << format_g17(s.H[i]) << ',' << format_g17(s.v[i]) << ',' << s.degree[i]
               << '\n';
    }
    if (!a.population_out.empty())
    {
        auto os = open_out(a.population_out);
        write_population(os, pop);
    }
    if (!a.trials_out.empty())
    {
        auto os = open_out(a.trials_out);
        write_trials_csv(os, res.trials);
    }
    std::cout << "lambda_hat=" << format_g17(res.lambda_hat) << " alpha=" << format_shortest(alpha)
              << " edge_limited=" << (res.edge_limited ? 1 : 0) << " trials=" << res.trials.size()
              << " h_growth=" << format_shortest(res.trials.back().h_growth) << " rejected=" << s.rejected << '\n';
    return 0;
}

int cmd_fit_scaling(std::string const& input, Common const& c)
{
    auto n = read_column(input, "n");
    std::vector<double> lambda;
    try
    {
        lambda = read_column(input, "lambda1");
    }
    catch (std::invalid_argument const&)
    {
        lambda = read_column(input, "lambda");
    }
    if (n.size() != lambda.size())
        throw std::invalid_argument("n and lambda columns differ in length");
    // average repeated sizes into one ensemble mean each
    std::map<double, std::pair<double, int>> acc;
    for (std::size_t i = 0; i < n.size(); ++i)
    {
        acc[n[i]].first += lambda[i];
        acc[n[i]].second += 1;
    }
    std::vector<std::pair<double, double>> pts;
    for (auto const& [size, s] : acc)
        pts.emplace_back(size, s.first / s.second);
    auto f = fit_scaling(pts);
    if (!c.out.empty())
        open_out(c.out) << to_json(f) << '\n';
    std::cout << "A=" << format_shortest(f.A) << " B=" << format_shortest(f.B) << " beta=" << format_shortest(f.beta)
              << " lambda_infinity=" << format_shortest(f.lambda_infinity) << " sse=" << format_shortest(f.sse)
              << '\n';
    return 0;
}

int cmd_fit_tail(std::string const& input, std::string const& column, std::vector<double> window, Common const& c)
{
    if (window.size() != 2)
        throw std::invalid_argument("--window takes two quantiles");
    auto f = fit_tail(read_column(input, column), {window[0], window[1]});
    if (!c.out.empty())
        open_out(c.out) << to_json(f) << '\n';
    std::cout << "alpha=" << format_shortest(f.alpha) << " r_squared=" << format_shortest(f.r_squared)
              << " points=" << f.points << '\n';
    return 0;
}

int cmd_density(std::string const& input,
                std::string const& column,
                double width,
                std::string const& mode_text,
                bool log_density,
                Common const& c)
{
    auto mode = parse_normalization(mode_text);
    auto values = normalize(read_column(input, column), mode);
    auto d = histogram(values, width, mode, column);
    if (!c.out.empty())
    {
        auto os = open_out(c.out);
        write_density_csv(os, d, log_density);
    }
    std::cout << "bins=" << d.counts.size() << " total=" << d.total << " normalization=" << to_string(mode) << '\n';
    return 0;
}

int cmd_experiment(std::string const& config_path, RunOptions const& ro, Common const& c)
{
    auto cfg = load_config(config_path);
    if (c.seed_given)
        cfg.master_seed = c.seed;
    if (!c.out.empty())
        cfg.output_dir = c.out;
    note(c, std::string("running ") + to_string(cfg.recipe) + " into " + cfg.output_dir);
    auto m = run_experiment(cfg, ro);
    std::size_t failed = 0;
    for (auto const& t : m.tasks)
        if (!t.ok)
        {
            ++failed;
            note(c, "task " + t.id + " failed: " + t.error);
        }
    std::cout << "recipe=" << to_string(cfg.recipe) << " tasks=" << m.tasks.size() << " failed=" << failed
              << " outputs=" << m.outputs.size() << " manifest=" << (cfg.output_dir + "/manifest.json") << '\n';
    return failed ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Random sparse matrix spectra by power iteration and the cavity method"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(version()));

    std::string spec_text, graph_path, input, column = "v", criterion;
    std::size_t n = 0;
    double delta = 0;
    int max_restarts = 100;
    bool laplacian = false;

    Common gen_c, pow_c, ci_c, pop_c, fs_c, ft_c, den_c, exp_c;

    auto* gen = app.add_subcommand("gen", "Generate a random graph instance");
    gen->add_option("--spec", spec_text, "Degree spec, e.g. two_point:4,8,0.9")->required();
    gen->add_option("--n", n, "Number of nodes")->required();
    gen->add_option("--delta", delta, "Coupling bias in [0, 1]")->required();
    gen->add_option("--max-restarts", max_restarts);
    add_common(gen, gen_c);

    PowerOptions po;
    double eta = std::numeric_limits<double>::quiet_NaN();
    auto* pw = app.add_subcommand("power", "First eigenpair by shifted power iteration");
    pw->add_option("--graph", graph_path, "Graph file written by gen");
    pw->add_option("--spec", spec_text);
    pw->add_option("--n", n);
    pw->add_option("--delta", delta);
    pw->add_flag("--laplacian", laplacian);
    pw->add_option("--tol", po.tol);
    pw->add_option("--max-iter", po.max_iter);
    pw->add_option("--eta", eta);
    add_common(pw, pow_c);

    double lambda = 0, tol = 1e-10;
    long max_sweeps = 100000;
    auto* ci = app.add_subcommand("cavity-instance", "Cavity message passing on one instance");
    ci->add_option("--graph", graph_path)->required();
    ci->add_option("--lambda", lambda)->required();
    ci->add_flag("--laplacian", laplacian);
    ci->add_option("--tol", tol);
    ci->add_option("--max-sweeps", max_sweeps);
    add_common(ci, ci_c);

    PopArgs pa;
    auto* cp = app.add_subcommand("cavity-pop", "Population dynamics and lambda search");
    cp->add_option("--spec", pa.spec)->required();
    cp->add_option("--delta", pa.delta)->required();
    cp->add_flag("--laplacian", pa.laplacian);
    cp->add_option("--criterion", pa.criterion)->check(CLI::IsMember({"growth_rate", "T_unit", "U_unit"}));
    cp->add_option("--lo", pa.lo);
    cp->add_option("--hi", pa.hi);
    cp->add_option("--n-pop", pa.opts.n_pop);
    cp->add_option("--burn-in", pa.opts.burn_in);
    cp->add_option("--measure", pa.opts.measure);
    cp->add_option("--tol-lambda", pa.opts.tol_lambda);
    cp->add_option("--strategy", pa.strategy);
    cp->add_option("--samples", pa.samples);
    cp->add_option("--population-out", pa.population_out);
    cp->add_option("--trials-out", pa.trials_out);
    add_common(cp, pop_c);

    auto* fsc = app.add_subcommand("fit-scaling", "Fit log L = A N^-beta + B");
    fsc->add_option("--input", input, "CSV with n and lambda1 (or lambda) columns")->required();
    add_common(fsc, fs_c);

    std::vector<double> window{0.9, 0.999};
    auto* ft = app.add_subcommand("fit-tail", "Power-law fit of the positive complementary CDF");
    ft->add_option("--input", input)->required();
    ft->add_option("--column", column);
    ft->add_option("--window", window)->expected(2)->delimiter(',');
    add_common(ft, ft_c);

    double width = 0.05;
    std::string mode = "raw";
    bool log_density = false;
    auto* den = app.add_subcommand("density", "Histogram density of one column");
    den->add_option("--input", input)->required();
    den->add_option("--column", column);
    den->add_option("--bin-width", width);
    den->add_option("--normalization", mode)->check(CLI::IsMember({"variance_unit", "abs_mean_unit", "raw"}));
    den->add_flag("--log", log_density);
    add_common(den, den_c);

    std::string config_path;
    RunOptions ro;
    auto* ex = app.add_subcommand("experiment", "Run a recipe from a JSON config");
    ex->add_option("--config", config_path)->required();
    ex->add_option("--workers", ro.workers);
    ex->add_option("--n-pop", ro.population.n_pop);
    ex->add_option("--burn-in", ro.population.burn_in);
    ex->add_option("--measure", ro.population.measure);
    ex->add_option("--samples", ro.marginal_samples);
    add_common(ex, exp_c);

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::CallForHelp const& e)
    {
        return app.exit(e);
    }
    catch (CLI::CallForAllHelp const& e)
    {
        return app.exit(e);
    }
    catch (CLI::CallForVersion const& e)
    {
        return app.exit(e);
    }
    catch (CLI::ParseError const& e)
    {
        std::cerr << e.what() << "\n\n" << app.help();
        return 1;
    }

    try
    {
        if (*gen)
            return cmd_gen(spec_text, n, delta, max_restarts, gen_c);
        if (*pw)
        {
            if (!std::isnan(eta))
                po.eta = eta;
            return cmd_power(graph_from(graph_path, spec_text, n, delta, pow_c), laplacian, po, pow_c);
        }
        if (*ci)
            return cmd_cavity_instance(load_graph(graph_path), laplacian, lambda, tol, max_sweeps, ci_c);
        if (*cp)
            return cmd_cavity_pop(pa, pop_c);
        if (*fsc)
            return cmd_fit_scaling(input, fs_c);
        if (*ft)
            return cmd_fit_tail(input, column, window, ft_c);
        if (*den)
            return cmd_density(input, column, width, mode, log_density, den_c);
        if (*ex)
            return cmd_experiment(config_path, ro, exp_c);
    }
    catch (NumericalError const& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    catch (std::exception const& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
