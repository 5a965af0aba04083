// One PASS/FAIL line per acceptance criterion, with the measured numbers.
// Exit status is nonzero when any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oracle/dense_eigen.hpp"
#include "oracle/reference.hpp"
#include "speccav/analysis.hpp"
#include "speccav/cavity.hpp"
#include "speccav/digest.hpp"
#include "speccav/graph.hpp"
#include "speccav/harness.hpp"
#include "speccav/power.hpp"

using namespace speccav;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 1;

DegreeSpec const two_point = DegreeSpec::two_point(4, 8, 0.9);

std::string fmt(char const* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(char const* f, ...)
{
    char buf[1024];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

struct Outcome
{
    bool pass = true;
    std::string detail;

    void check(bool ok, std::string const& what)
    {
        pass = pass && ok;
        if (!detail.empty())
            detail += "; ";
        detail += what + (ok ? "" : " [x]");
    }
};

PopulationOptions desk_population()
{
    PopulationOptions o;
    o.n_pop = 20000;
    o.burn_in = 200;
    o.measure = 100;
    return o;
}

fs::path scratch(std::string const& name)
{
    auto p = fs::temp_directory_path() / "speccav_acceptance" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string read_file(fs::path const& p)
{
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

oracle::Matrix dense(GraphInstance const& g)
{
    oracle::Matrix m(g.size(), std::vector<double>(g.size(), 0.0));
    for (auto const& e : g.edges())
        m[e.i][e.j] = m[e.j][e.i] = e.coupling;
    return m;
}

double mean_of(std::vector<double> const& v)
{
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(std::vector<double> const& v)
{
    double m = mean_of(v), s = 0;
    for (double x : v)
        s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

//---------------------------------------------------------------------------//

Outcome regular_exactness()
{
    Outcome out;
    auto g = generate_graph(DegreeSpec::regular(4), 1024, 1.0, kSeed);
    Rng rng(derive_seed(kSeed, "power-start"));
    auto r = power_iterate(g, PowerOptions{}, rng);
    double spread = *std::max_element(r.vector.begin(), r.vector.end())
                    - *std::min_element(r.vector.begin(), r.vector.end());
    out.check(std::abs(r.lambda_1 - 4.0) < 1e-8, fmt("power lambda1-4=%.2e", r.lambda_1 - 4.0));
    out.check(spread < 1e-8, fmt("vector spread=%.2e", spread));

    PopulationTemplate tmpl{DegreeSpec::regular(4), 1.0, MatrixVariant::adjacency};
    auto o = desk_population();
    auto [lo, hi] = default_lambda_window(tmpl.spec, tmpl.variant);
    auto s = find_lambda(tmpl, lo, hi, LambdaCriterion::growth_rate, o, kSeed);
    out.check(std::abs(s.lambda_hat - 4.0) < 1e-3, fmt("cavity lambda_hat=%.6f", s.lambda_hat));
    out.check(sd_of(s.population->A()) < 1e-6, fmt("A std at lambda_hat=%.2e", sd_of(s.population->A())));

    Rng prng(derive_seed(kSeed, "regular-pool"));
    CavityPopulation pop(tmpl, 4.0, o.n_pop, prng);
    for (int i = 0; i < o.burn_in; ++i)
        population_sweep_sequential(pop, prng);
    auto const& A = pop.A();
    double worst = 0;
    for (double a : A)
        worst = std::max(worst, std::abs(a - 3.0));
    out.check(worst < 1e-6 && sd_of(A) < 1e-6, fmt("at lambda=4 max|A-3|=%.2e std=%.2e", worst, sd_of(A)));
    return out;
}

Outcome dense_oracle()
{
    Outcome out;
    std::size_t const sizes[] = {16, 64, 128};
    double const deltas[] = {0.0, 0.3, 0.8, 1.0};
    double worst_dl = 0, worst_cos = 0;
    int bad = 0;
    for (int t = 0; t < 50; ++t)
    {
        std::size_t n = sizes[t % 3];
        double d = deltas[(t / 3) % 4];
        auto g = generate_graph(two_point, n, d, derive_seed(kSeed, 1000 + t));
        Rng rng(derive_seed(g.seed(), "power-start"));
        auto r = power_iterate(g, PowerOptions{}, rng);
        auto e = oracle::jacobi_eigen(dense(g));
        double dl = std::abs(r.lambda_1 - e.values.back());
        double miss = 1 - std::abs(oracle::cosine(r.vector, e.vectors.back()));
        worst_dl = std::max(worst_dl, dl);
        worst_cos = std::max(worst_cos, miss);
        if (!(dl < 1e-8 && miss < 1e-8))
            ++bad;
    }
    out.check(bad == 0, fmt("50 instances, max|dlambda|=%.2e, max(1-cos)=%.2e, failures=%d", worst_dl, worst_cos, bad));
    return out;
}

Outcome tail_exponent()
{
    Outcome out;
    PopulationTemplate tmpl{two_point, 0.0, MatrixVariant::adjacency};
    RunOptions ro;
    ro.population = desk_population();
    ro.population.n_pop = 50000;
    ro.marginal_samples = 200000;
    auto c = run_cavity_task(tmpl, task_seed(kSeed, Recipe::tail_comparison, two_point, 0.0, 0, 0), ro);
    auto f = fit_tail(c.samples.v);
    out.check(c.samples.v.size() >= 100000, fmt("samples=%zu", c.samples.v.size()));
    out.check(std::abs(f.alpha - 1.35) <= 0.15,
              fmt("lambda_hat=%.5f alpha=%.4f (r2=%.4f, %zu points)", c.search.lambda_hat, f.alpha, f.r_squared,
                  f.points));
    return out;
}

Outcome scaling_fit_recovery()
{
    Outcome out;
    double const A = -0.870, B = 1.465, beta = 0.539;
    std::vector<std::pair<double, double>> pts;
    for (int e = 8; e <= 12; ++e)
    {
        double n = std::ldexp(1.0, e);
        pts.emplace_back(n, std::exp(A * std::pow(n, -beta) + B));
    }
    auto f = fit_scaling(pts);
    double err = std::max({std::abs(f.A - A), std::abs(f.B - B), std::abs(f.beta - beta)});
    out.check(err < 1e-6, fmt("synthetic max param error=%.2e", err));

    ExperimentConfig cfg;
    cfg.recipe = Recipe::scaling_fit;
    cfg.spec = two_point;
    cfg.deltas = {0.0, 0.8};
    cfg.sizes = {256, 512, 1024, 2048, 4096};
    cfg.ensemble_count = 200;
    cfg.master_seed = kSeed;
    cfg.output_dir = scratch("scaling").string();
    auto m = run_experiment(cfg);
    out.check(!m.failed(), fmt("tasks=%zu", m.tasks.size()));
    auto f0 = nlohmann::json::parse(read_file(fs::path(cfg.output_dir) / "scaling_fit_delta=0.json"));
    auto f8 = nlohmann::json::parse(read_file(fs::path(cfg.output_dir) / "scaling_fit_delta=0.8.json"));
    double b0 = f0["beta"], l0 = f0["lambda_infinity"], b8 = f8["beta"];
    out.check(b0 >= 0.42 && b0 <= 0.66, fmt("delta 0: beta=%.4f A=%.4f B=%.4f", b0, double(f0["A"]), double(f0["B"])));
    out.check(std::abs(l0 / std::exp(1.465) - 1) < 0.05, fmt("delta 0: exp(B)=%.4f", l0));
    out.check(b8 >= 0.85 && b8 <= 1.1, fmt("delta 0.8: beta=%.4f exp(B)=%.4f", b8, double(f8["lambda_infinity"])));
    return out;
}

Outcome laplacian_table()
{
    Outcome out;
    ExperimentConfig cfg;
    cfg.recipe = Recipe::laplacian_table;
    cfg.spec = two_point;
    cfg.deltas = {1.0};
    cfg.sizes = {256, 4096};
    cfg.ensemble_count = 100;
    cfg.master_seed = kSeed;
    cfg.output_dir = scratch("laplacian").string();
    RunOptions ro;
    ro.population = desk_population();
    auto m = run_experiment(cfg, ro);
    out.check(!m.failed(), fmt("tasks=%zu", m.tasks.size()));
    std::map<std::string, double> got;
    std::istringstream is(read_file(fs::path(cfg.output_dir) / "laplacian_table.csv"));
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line))
    {
        std::vector<std::string> f;
        std::stringstream ls(line);
        for (std::string c; std::getline(ls, c, ',');)
            f.push_back(c);
        got[f[0] + f[1]] = std::stod(f[3]);
    }
    out.check(std::abs(got["power256"] - 11.07) <= 0.10, fmt("N=256 mean=%.4f", got["power256"]));
    out.check(std::abs(got["power4096"] - 11.46) <= 0.10, fmt("N=4096 mean=%.4f", got["power4096"]));
    out.check(std::abs(got["cavity"] - 11.53) <= 0.10, fmt("cavity=%.4f", got["cavity"]));
    return out;
}

Outcome convergence_statistic()
{
    Outcome out;
    ExperimentConfig cfg;
    cfg.recipe = Recipe::eigvec_density;
    cfg.spec = two_point;
    cfg.deltas = {0.0, 0.8};
    cfg.sizes = {512, 1024, 2048, 4096};
    cfg.ensemble_count = 200;
    cfg.master_seed = kSeed;
    cfg.output_dir = scratch("density").string();
    RunOptions ro;
    ro.population = desk_population();
    auto m = run_experiment(cfg, ro);
    out.check(!m.failed(), fmt("tasks=%zu", m.tasks.size()));
    out.check(m.comparisons.size() == 2, fmt("comparisons=%zu", m.comparisons.size()));
    for (auto const& [d, c] : m.comparisons)
    {
        std::string s;
        for (auto const& [n, v] : c.S)
            s += fmt(" %zu:%.3e", n, v);
        out.check(c.monotone && !c.degenerate, fmt("delta %.1f S(N)=%s", d, s.c_str()));
    }
    return out;
}

Outcome lambda_shape()
{
    Outcome out;
    for (auto const& spec : {two_point, DegreeSpec::truncated_poisson(4, 8)})
    {
        auto o = desk_population();
        std::vector<double> lam;
        for (int i = 0; i <= 10; ++i)
        {
            PopulationTemplate tmpl{spec, i / 10.0, MatrixVariant::adjacency};
            auto [lo, hi] = default_lambda_window(spec, tmpl.variant);
            lam.push_back(find_lambda(tmpl, lo, hi, LambdaCriterion::growth_rate, o, kSeed).lambda_hat);
        }
        auto flat = std::minmax_element(lam.begin(), lam.begin() + 7);
        double spread = (*flat.second - *flat.first) / mean_of({lam.begin(), lam.begin() + 7});
        bool rising = true;
        for (int i = 8; i <= 10; ++i)
            rising = rising && lam[i] > lam[i - 1];
        std::string s;
        for (double l : lam)
            s += fmt(" %.4f", l);
        out.check(spread <= 0.02 && rising,
                  fmt("%s: spread(<=0.6)=%.2f%% lambda=%s", spec.to_string().c_str(), 100 * spread, s.c_str()));
    }
    return out;
}

Outcome property_suites()
{
    Outcome out;

    // edge ends of a generated graph against k p(k) / <k>
    auto g = generate_graph(two_point, 250000, 0.0, kSeed);
    std::map<int, double> ends;
    double total = 0;
    for (auto const& e : g.edges())
    {
        ends[g.degrees()[e.i]] += 1;
        ends[g.degrees()[e.j]] += 1;
        total += 2;
    }
    double mean_k = 0.9 * 4 + 0.1 * 8;
    double worst = 0;
    for (int k : {4, 8})
    {
        double expect = k * (k == 4 ? 0.9 : 0.1) / mean_k;
        worst = std::max(worst, std::abs(ends[k] / total / expect - 1));
    }
    out.check(worst < 0.01, fmt("r(k) rel err=%.2e over %.0f ends", worst, total));

    PopulationTemplate tmpl{two_point, 0.3, MatrixVariant::adjacency};
    Rng r0(5);
    CavityPopulation base(tmpl, 4.6, 5000, r0);
    for (int i = 0; i < 20; ++i)
        population_sweep_sequential(base, r0);

    bool linear = true, independent = true;
    for (auto strategy : {population_sweep_sequential, population_sweep_parallel})
    {
        CavityPopulation a = base, b = base, c = base;
        for (double& h : b.mutable_H())
            h *= 4;
        for (double& h : c.mutable_H())
            h = 0;
        Rng ra(9), rb(9), rc(9);
        for (int i = 0; i < 5; ++i)
        {
            strategy(a, ra, false);
            strategy(b, rb, false);
            strategy(c, rc, false);
        }
        for (std::size_t m = 0; m < a.size(); ++m)
        {
            linear = linear && b.H()[m] == 4 * a.H()[m] && b.A()[m] == a.A()[m];
            independent = independent && c.A()[m] == a.A()[m];
        }
    }
    out.check(linear, "H-linearity exact");
    out.check(independent, "A-independence exact");

    auto v = oracle::normal_samples(100000, 3);
    double idem = 0;
    for (auto mode : {NormalizationMode::variance_unit, NormalizationMode::abs_mean_unit})
    {
        auto once = normalize(v, mode);
        auto twice = normalize(once, mode);
        for (std::size_t i = 0; i < once.size(); ++i)
            idem = std::max(idem, std::abs(twice[i] - once[i]) / std::abs(once[i]));
    }
    out.check(idem < 1e-12, fmt("normalize idempotent, max rel change=%.1e", idem));

    std::vector<int> deg;
    Rng dr(4);
    for (std::size_t i = 0; i < v.size(); ++i)
        deg.push_back(dr.uniform() < 0.9 ? 4 : 8);
    auto parts = decompose_by_degree(v, deg, 0.05);
    auto whole = histogram(v, 0.05);
    bool partition = true;
    for (std::int64_t b = whole.first_bin; b <= whole.last_bin(); ++b)
    {
        std::int64_t sum = 0;
        for (auto const& [k, d] : parts)
            sum += d.count_at(b);
        partition = partition && sum == whole.count_at(b);
    }
    out.check(partition, "degree decomposition partitions mass");

    auto digests = [](std::string const& dir) {
        ExperimentConfig cfg;
        cfg.recipe = Recipe::eigvec_density;
        cfg.spec = two_point;
        cfg.deltas = {0.0};
        cfg.sizes = {64, 128};
        cfg.ensemble_count = 10;
        cfg.master_seed = kSeed;
        cfg.output_dir = scratch(dir).string();
        RunOptions ro;
        ro.population.n_pop = 2000;
        ro.population.burn_in = 50;
        ro.population.measure = 20;
        ro.population.tol_lambda = 1e-2;
        ro.marginal_samples = 20000;
        std::vector<std::string> out;
        for (auto const& o : run_experiment(cfg, ro).outputs)
            out.push_back(o.path + " " + o.sha256);
        return out;
    };
    auto d1 = digests("repro_a"), d2 = digests("repro_b");
    out.check(!d1.empty() && d1 == d2, fmt("manifest outputs identical across runs (%zu files)", d1.size()));
    return out;
}

Outcome update_strategies()
{
    Outcome out;
    PopulationTemplate tmpl{two_point, 0.8, MatrixVariant::adjacency};
    auto o = desk_population();
    o.measure = 50;
    o.tol_lambda = 1e-4;
    auto [lo, hi] = default_lambda_window(tmpl.spec, tmpl.variant);
    auto s = find_lambda(tmpl, lo, hi, LambdaCriterion::growth_rate, o, kSeed);
    double drift = std::abs(s.trials.back().h_growth - 1);
    out.check(drift < 1e-4, fmt("lambda_hat=%.6f, sequential |mean h - 1| over 50 sweeps=%.2e", s.lambda_hat, drift));

    // continuation on a fresh stream: the 50-sweep mean must sit within
    // three standard errors of 1
    CavityPopulation seq = *s.population, par = *s.population;
    Rng rs(derive_seed(kSeed, "continuation")), rp(derive_seed(kSeed, "continuation"));
    std::vector<double> hs, hp;
    for (int i = 0; i < 50; ++i)
    {
        population_sweep_sequential(seq, rs);
        hs.push_back(seq.h_growth());
        population_sweep_parallel(par, rp);
        hp.push_back(par.h_growth());
    }
    double se = sd_of(hs) / std::sqrt(50.0);
    out.check(std::abs(mean_of(hs) - 1) < 3 * se,
              fmt("continuation mean-1=%.2e (sd %.2e, se %.2e)", mean_of(hs) - 1, sd_of(hs), se));
    auto [mn, mx] = std::minmax_element(hp.begin(), hp.end());
    out.check(true, fmt("parallel amplitude=%.3e mean-1=%.2e", (*mx - *mn) / 2, mean_of(hp) - 1));
    return out;
}

}  // namespace

int main(int argc, char** argv)
{
    std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
        {1, regular_exactness},  {2, dense_oracle},          {3, tail_exponent},
        {4, scaling_fit_recovery}, {5, laplacian_table},     {6, convergence_statistic},
        {7, lambda_shape},       {8, property_suites},       {9, update_strategies},
    };
    std::vector<int> only;
    for (int i = 1; i < argc; ++i)
        only.push_back(std::atoi(argv[i]));

    int failed = 0;
    for (auto const& [id, run] : criteria)
    {
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end())
            continue;
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try
        {
            o = run();
        }
        catch (std::exception const& e)
        {
            o.check(false, std::string("exception: ") + e.what());
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("criterion %d: %s (%.1f s) %s\n", id, o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
