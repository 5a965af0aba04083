#include "speccav/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "speccav/digest.hpp"
#include "speccav/errors.hpp"
#include "speccav/format.hpp"
#include "speccav/graph.hpp"
#include "speccav/parallel.hpp"

#ifndef SPECCAV_VERSION
#    define SPECCAV_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace speccav {

char const* version()
{
    return SPECCAV_VERSION;
}

namespace {

constexpr std::pair<Recipe, char const*> kRecipeNames[] = {
    {Recipe::lambda_vs_delta, "lambda_vs_delta"},
    {Recipe::scaling_fit, "scaling_fit"},
    {Recipe::eigvec_density, "eigvec_density"},
    {Recipe::degree_decomposition, "degree_decomposition"},
    {Recipe::cavity_field_density, "cavity_field_density"},
    {Recipe::laplacian_table, "laplacian_table"},
    {Recipe::tail_comparison, "tail_comparison"},
};

}  // namespace

char const* to_string(Recipe r)
{
    for (auto const& [rec, name] : kRecipeNames)
        if (rec == r)
            return name;
    return "";
}

Recipe parse_recipe(std::string const& s)
{
    for (auto const& [rec, name] : kRecipeNames)
        if (s == name)
            return rec;
    throw std::invalid_argument("unknown recipe '" + s + "'");
}

char const* to_string(Method m)
{
    switch (m)
    {
        case Method::power:
            return "power";
        case Method::cavity:
            return "cavity";
        case Method::both:
            return "both";
    }
    return "";
}

Method parse_method(std::string const& s)
{
    if (s == "power")
        return Method::power;
    if (s == "cavity")
        return Method::cavity;
    if (s == "both")
        return Method::both;
    throw std::invalid_argument("unknown method '" + s + "'");
}

bool ExperimentConfig::uses_power() const
{
    if (recipe == Recipe::cavity_field_density)
        return false;
    if (recipe == Recipe::scaling_fit)
        return true;
    return method != Method::cavity;
}

bool ExperimentConfig::uses_cavity() const
{
    if (recipe == Recipe::cavity_field_density)
        return true;
    if (recipe == Recipe::scaling_fit)
        return false;
    return method != Method::power;
}

//---------------------------------------------------------------------------//
// Config
//---------------------------------------------------------------------------//

ExperimentConfig parse_config(std::string const& json_text, bool env_override)
{
    json j;
    try
    {
        j = json::parse(json_text);
    }
    catch (json::parse_error const& e)
    {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object())
        throw std::invalid_argument("config must be a JSON object");

    static std::set<std::string> const known
        = {"recipe", "spec", "deltas", "sizes", "ensemble_count", "master_seed", "method", "output_dir"};
    for (auto const& item : j.items())
        if (!known.count(item.key()))
            throw std::invalid_argument("unknown config key '" + item.key() + "'");

    ExperimentConfig cfg;
    try
    {
        if (j.contains("recipe"))
            cfg.recipe = parse_recipe(j["recipe"].get<std::string>());
        if (j.contains("spec"))
            cfg.spec = DegreeSpec::parse(j["spec"].get<std::string>());
        if (j.contains("deltas"))
            cfg.deltas = j["deltas"].get<std::vector<double>>();
        if (j.contains("sizes"))
            cfg.sizes = j["sizes"].get<std::vector<std::size_t>>();
        if (j.contains("ensemble_count"))
            cfg.ensemble_count = j["ensemble_count"].get<int>();
        if (j.contains("master_seed"))
            cfg.master_seed = j["master_seed"].get<std::uint64_t>();
        if (j.contains("method"))
            cfg.method = parse_method(j["method"].get<std::string>());
        if (j.contains("output_dir"))
            cfg.output_dir = j["output_dir"].get<std::string>();
    }
    catch (json::exception const& e)
    {
        throw std::invalid_argument(std::string("config field has the wrong type: ") + e.what());
    }

    if (env_override)
    {
        if (char const* s = std::getenv("SPECCAV_SEED"); s && *s)
        {
            char* end = nullptr;
            auto v = std::strtoull(s, &end, 10);
            if (*end != '\0')
                throw std::invalid_argument(std::string("SPECCAV_SEED is not an integer: ") + s);
            cfg.master_seed = v;
        }
    }
    validate_config(cfg);
    return cfg;
}

ExperimentConfig load_config(std::string const& path, bool env_override)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), env_override);
}

namespace {

json config_json(ExperimentConfig const& cfg)
{
    json j;
    j["recipe"] = to_string(cfg.recipe);
    j["spec"] = cfg.spec.to_string();
    j["deltas"] = cfg.deltas;
    j["sizes"] = cfg.sizes;
    j["ensemble_count"] = cfg.ensemble_count;
    j["master_seed"] = cfg.master_seed;
    j["method"] = to_string(cfg.method);
    j["output_dir"] = cfg.output_dir;
    return j;
}

}  // namespace

std::string config_to_json(ExperimentConfig const& cfg)
{
    return config_json(cfg).dump(2);
}

void validate_config(ExperimentConfig const& cfg)
{
    if (cfg.ensemble_count < 1)
        throw std::invalid_argument("ensemble_count must be >= 1");
    for (double d : cfg.deltas)
        if (!(d >= 0 && d <= 1))
            throw std::invalid_argument("every delta must lie in [0, 1]");
    if (cfg.recipe == Recipe::laplacian_table)
    {
        for (double d : cfg.deltas)
            if (d != 1.0)
                throw std::invalid_argument("laplacian_table is defined for delta = 1 only");
    }
    else if (cfg.deltas.empty())
        throw std::invalid_argument("deltas must not be empty");
    if (cfg.uses_power())
    {
        if (cfg.sizes.empty())
            throw std::invalid_argument("sizes must not be empty for matrix methods");
        for (auto n : cfg.sizes)
            if (n < 2)
                throw std::invalid_argument("every size must be >= 2");
    }
    if (cfg.recipe == Recipe::scaling_fit && std::set<std::size_t>(cfg.sizes.begin(), cfg.sizes.end()).size() < 4)
        throw std::invalid_argument("scaling_fit needs at least 4 distinct sizes");
    if (cfg.output_dir.empty())
        throw std::invalid_argument("output_dir must not be empty");
}

//---------------------------------------------------------------------------//
// Tasks
//---------------------------------------------------------------------------//

std::uint64_t task_seed(std::uint64_t master_seed,
                        Recipe recipe,
                        DegreeSpec const& spec,
                        double delta,
                        std::size_t n,
                        std::size_t index)
{
    std::string tag = std::string(to_string(recipe)) + "|" + spec.to_string() + "|delta=" + format_shortest(delta)
                      + "|n=" + std::to_string(n);
    return derive_seed(derive_seed(master_seed, tag), index);
}

std::pair<double, double> default_lambda_window(DegreeSpec const& spec, MatrixVariant variant)
{
    double k = spec.k_max();
    return {0.5, variant == MatrixVariant::laplacian ? 2 * k + 1 : k + 1};
}

PowerTaskResult run_power_task(DegreeSpec const& spec,
                               std::size_t n,
                               double delta,
                               MatrixVariant variant,
                               std::uint64_t seed,
                               RunOptions const& opts)
{
    PowerTaskResult out;
    for (int attempt = 0;; ++attempt)
    {
        std::uint64_t s = attempt == 0 ? seed : derive_seed(seed, static_cast<std::uint64_t>(attempt));
        out.attempts = attempt + 1;
        try
        {
            auto g = generate_graph(spec, n, delta, s, opts.max_restarts);
            Rng start(derive_seed(s, "power-start"));
            out.result = variant == MatrixVariant::adjacency ? power_iterate(g, opts.power, start)
                                                             : power_iterate(build_laplacian(g), opts.power, start);
            out.seed = s;
            out.degrees = g.degrees();
            return out;
        }
        catch (RestartLimitExceeded const&)
        {
            if (attempt >= opts.retry_budget)
                throw;
        }
    }
}

CavityTaskResult run_cavity_task(PopulationTemplate const& tmpl, std::uint64_t seed, RunOptions const& opts)
{
    CavityTaskResult out;
    auto [lo, hi] = default_lambda_window(tmpl.spec, tmpl.variant);
    out.search = find_lambda(tmpl, lo, hi, LambdaCriterion::growth_rate, opts.population, seed);
    auto& pop = *out.search.population;
    pop.orient();
    Rng rng(derive_seed(seed, "marginals"));
    out.samples = sample_marginals(pop, opts.marginal_samples, rng);
    return out;
}

ComparisonResult compare_methods(std::vector<std::pair<std::size_t, DensitySeries>> const& matrix,
                                 DensitySeries const& cavity)
{
    ComparisonResult out;
    for (auto const& [n, d] : matrix)
        out.S.emplace_back(n, convergence_S(d, cavity));
    std::sort(out.S.begin(), out.S.end());
    out.degenerate = std::all_of(out.S.begin(), out.S.end(), [](auto const& p) { return p.second == 0; });
    bool decreasing = true;
    for (std::size_t i = 1; i < out.S.size(); ++i)
        if (!(out.S[i].second < out.S[i - 1].second))
            decreasing = false;
    out.monotone = out.degenerate || decreasing;
    return out;
}

//---------------------------------------------------------------------------//
// Manifest
//---------------------------------------------------------------------------//

bool RunManifest::failed() const
{
    return std::any_of(tasks.begin(), tasks.end(), [](auto const& t) { return !t.ok; });
}

std::string RunManifest::to_json() const
{
    json j;
    j["version"] = version;
    j["config"] = config_json(config);
    json o;
    o["workers"] = options.workers;
    o["retry_budget"] = options.retry_budget;
    o["max_restarts"] = options.max_restarts;
    o["power_tol"] = options.power.tol;
    o["power_max_iter"] = options.power.max_iter;
    o["n_pop"] = options.population.n_pop;
    o["burn_in"] = options.population.burn_in;
    o["measure"] = options.population.measure;
    o["tol_lambda"] = options.population.tol_lambda;
    o["strategy"] = options.population.strategy == UpdateStrategy::sequential ? "sequential" : "parallel";
    o["marginal_samples"] = options.marginal_samples;
    o["s_bin_width"] = options.s_bin_width;
    o["plot_bin_width"] = options.plot_bin_width;
    j["run_options"] = o;
    j["wall_seconds"] = wall_seconds;
    j["failed"] = failed();
    json tj = json::array();
    for (auto const& t : tasks)
    {
        json r;
        r["id"] = t.id;
        r["seed"] = t.seed;
        r["attempts"] = t.attempts;
        r["wall_seconds"] = t.wall_seconds;
        r["status"] = t.ok ? "ok" : "failed";
        if (!t.ok)
            r["error"] = t.error;
        tj.push_back(r);
    }
    j["tasks"] = tj;
    json cj = json::array();
    for (auto const& [delta, c] : comparisons)
    {
        json r;
        r["delta"] = delta;
        json s = json::array();
        for (auto const& [n, v] : c.S)
            s.push_back({{"n", n}, {"S", v}});
        r["S"] = s;
        r["verdict"] = c.degenerate ? "degenerate" : (c.monotone ? "decreasing" : "not_monotone");
        cj.push_back(r);
    }
    j["comparisons"] = cj;
    json oj = json::array();
    for (auto const& f : outputs)
        oj.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    j["outputs"] = oj;
    return j.dump(2);
}

//---------------------------------------------------------------------------//
// Experiment
//---------------------------------------------------------------------------//

namespace {

struct PendingTask
{
    std::string id;
    std::uint64_t seed = 0;
    std::function<int()> run;  // returns attempts
};

std::string delta_tag(double d)
{
    return "delta=" + format_shortest(d);
}

class Writer
{
  public:
    explicit Writer(fs::path dir) : dir_(std::move(dir)) {}

    void write(std::string const& name, std::string const& content)
    {
        std::ofstream out(dir_ / name, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot write '" + (dir_ / name).string() + "'");
        out << content;
        names_.push_back(name);
    }

    std::vector<OutputRecord> inventory() const
    {
        std::vector<OutputRecord> out;
        auto names = names_;
        std::sort(names.begin(), names.end());
        for (auto const& n : names)
            out.push_back({n, sha256_file((dir_ / n).string()), fs::file_size(dir_ / n)});
        return out;
    }

  private:
    fs::path dir_;
    std::vector<std::string> names_;
};

// Every instance vector is scaled on its own, then pooled.
std::vector<double> pooled_vectors(std::vector<std::optional<PowerTaskResult>> const& runs,
                                   NormalizationMode mode,
                                   std::vector<int>* degrees = nullptr)
{
    std::vector<double> out;
    for (auto const& r : runs)
    {
        if (!r)
            continue;
        auto v = normalize(r->result.vector, mode);
        out.insert(out.end(), v.begin(), v.end());
        if (degrees)
            degrees->insert(degrees->end(), r->degrees.begin(), r->degrees.end());
    }
    return out;
}

std::string density_csv(std::vector<DensitySeries> const& series, bool log_density = false)
{
    std::ostringstream os;
    bool header = true;
    for (auto const& d : series)
    {
        write_density_csv(os, d, log_density, header);
        header = false;
    }
    if (header)
        os << "bin_center,density,count,tag\n";
    return os.str();
}

std::string ccdf_csv(std::vector<std::pair<double, double>> const& pts)
{
    std::ostringstream os;
    os << "v,ccdf\n";
    for (auto const& [v, c] : pts)
        os << format_g17(v) << ',' << format_g17(c) << '\n';
    return os.str();
}

}  // namespace

RunManifest run_experiment(ExperimentConfig const& config, RunOptions const& opts)
{
    validate_config(config);
    auto t_start = std::chrono::steady_clock::now();

    RunManifest manifest;
    manifest.config = config;
    manifest.options = opts;
    manifest.version = version();

    fs::path dir(config.output_dir);
    fs::create_directories(dir);

    bool laplacian = config.recipe == Recipe::laplacian_table;
    MatrixVariant variant = laplacian ? MatrixVariant::laplacian : MatrixVariant::adjacency;
    std::vector<double> deltas = config.deltas;
    if (laplacian && deltas.empty())
        deltas = {1.0};
    bool keep_vectors = config.recipe == Recipe::eigvec_density || config.recipe == Recipe::degree_decomposition
                        || config.recipe == Recipe::tail_comparison;
    auto count = static_cast<std::size_t>(config.ensemble_count);
    std::vector<std::size_t> sizes = config.uses_power() ? config.sizes : std::vector<std::size_t>{};

    // power[d][s][i], cavity[d]
    std::vector<std::vector<std::vector<std::optional<PowerTaskResult>>>> power(
        deltas.size(), std::vector<std::vector<std::optional<PowerTaskResult>>>(sizes.size()));
    std::vector<std::optional<CavityTaskResult>> cavity(deltas.size());

    std::vector<PendingTask> tasks;
    for (std::size_t d = 0; d < deltas.size(); ++d)
    {
        if (config.uses_cavity())
        {
            PendingTask t;
            t.id = "cavity|" + delta_tag(deltas[d]);
            t.seed = task_seed(config.master_seed, config.recipe, config.spec, deltas[d], 0, 0);
            t.run = [&, d, seed = t.seed] {
                PopulationTemplate tmpl{config.spec, deltas[d], variant};
                cavity[d] = run_cavity_task(tmpl, seed, opts);
                return 1;
            };
            tasks.push_back(std::move(t));
        }
        for (std::size_t s = 0; s < sizes.size(); ++s)
        {
            power[d][s].resize(count);
            for (std::size_t i = 0; i < count; ++i)
            {
                PendingTask t;
                t.id = "power|" + delta_tag(deltas[d]) + "|n=" + std::to_string(sizes[s]) + "|i=" + std::to_string(i);
                t.seed = task_seed(config.master_seed, config.recipe, config.spec, deltas[d], sizes[s], i);
                t.run = [&, d, s, i, seed = t.seed] {
                    auto r = run_power_task(config.spec, sizes[s], deltas[d], variant, seed, opts);
                    if (!keep_vectors)
                        r.result.vector = {};
                    int attempts = r.attempts;
                    power[d][s][i] = std::move(r);
                    return attempts;
                };
                tasks.push_back(std::move(t));
            }
        }
    }

    manifest.tasks.resize(tasks.size());
    parallel_for(tasks.size(), opts.workers, [&](std::size_t k) {
        auto& rec = manifest.tasks[k];
        rec.id = tasks[k].id;
        rec.seed = tasks[k].seed;
        auto t0 = std::chrono::steady_clock::now();
        try
        {
            rec.attempts = tasks[k].run();
            rec.ok = true;
        }
        catch (std::exception const& e)
        {
            rec.ok = false;
            rec.error = e.what();
        }
        rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    });

    Writer out(dir);
    auto failed_task = [&](std::string const& id, std::string const& what) {
        TaskRecord r;
        r.id = id;
        r.error = what;
        manifest.tasks.push_back(r);
    };

    // Per-instance eigenvalues, for every recipe that ran matrices.
    if (!sizes.empty())
    {
        std::ostringstream os;
        os << "variant,delta,n,instance,seed,lambda1,iterations\n";
        for (std::size_t d = 0; d < deltas.size(); ++d)
            for (std::size_t s = 0; s < sizes.size(); ++s)
                for (std::size_t i = 0; i < count; ++i)
                    if (auto const& r = power[d][s][i])
                        os << to_string(variant) << ',' << format_shortest(deltas[d]) << ',' << sizes[s] << ','
                           << i << ',' << r->seed << ',' << format_g17(r->result.lambda_1) << ','
                           << r->result.iterations << '\n';
        out.write("ensemble_lambda.csv", os.str());
    }
    auto ensemble_mean = [&](std::size_t d, std::size_t s) -> std::optional<std::pair<double, double>> {
        std::vector<double> l;
        for (auto const& r : power[d][s])
            if (r)
                l.push_back(r->result.lambda_1);
        if (l.empty())
            return std::nullopt;
        double m = 0;
        for (double x : l)
            m += x;
        m /= static_cast<double>(l.size());
        double se = 0;
        if (l.size() > 1)
        {
            for (double x : l)
                se += (x - m) * (x - m);
            se = std::sqrt(se / static_cast<double>(l.size() - 1) / static_cast<double>(l.size()));
        }
        return std::pair{m, se};
    };

    if (config.uses_cavity())
    {
        for (std::size_t d = 0; d < deltas.size(); ++d)
        {
            if (!cavity[d])
                continue;
            std::ostringstream os;
            write_trials_csv(os, cavity[d]->search.trials);
            out.write("cavity_trials_" + delta_tag(deltas[d]) + ".csv", os.str());
        }
    }

    auto mode_for = [&](std::size_t d) -> NormalizationMode {
        std::optional<double> alpha;
        if (cavity[d])
        {
            try
            {
                alpha = fit_tail(cavity[d]->samples.v).alpha;
            }
            catch (NumericalError const&)
            {
            }
        }
        return choose_normalization(config.spec.kind() == DegreeKind::two_point, deltas[d], alpha);
    };

    switch (config.recipe)
    {
        case Recipe::lambda_vs_delta:
        case Recipe::laplacian_table: {
            std::ostringstream os;
            os << "method,n,delta,lambda,stderr,edge_limited\n";
            for (std::size_t d = 0; d < deltas.size(); ++d)
            {
                for (std::size_t s = 0; s < sizes.size(); ++s)
                    if (auto m = ensemble_mean(d, s))
                        os << "power," << sizes[s] << ',' << format_shortest(deltas[d]) << ','
                           << format_g17(m->first) << ',' << format_g17(m->second) << ",\n";
                if (cavity[d])
                    os << "cavity,," << format_shortest(deltas[d]) << ','
                       << format_g17(cavity[d]->search.lambda_hat) << ",," << (cavity[d]->search.edge_limited ? 1 : 0)
                       << '\n';
            }
            out.write(laplacian ? "laplacian_table.csv" : "lambda_vs_delta.csv", os.str());
            break;
        }
        case Recipe::scaling_fit: {
            for (std::size_t d = 0; d < deltas.size(); ++d)
            {
                std::vector<std::pair<double, double>> pts;
                for (std::size_t s = 0; s < sizes.size(); ++s)
                    if (auto m = ensemble_mean(d, s))
                        pts.emplace_back(static_cast<double>(sizes[s]), m->first);
                try
                {
                    out.write("scaling_fit_" + delta_tag(deltas[d]) + ".json", to_json(fit_scaling(pts)) + "\n");
                }
                catch (std::exception const& e)
                {
                    failed_task("fit_scaling|" + delta_tag(deltas[d]), e.what());
                }
            }
            break;
        }
        case Recipe::eigvec_density:
        case Recipe::tail_comparison: {
            bool tails = config.recipe == Recipe::tail_comparison;
            for (std::size_t d = 0; d < deltas.size(); ++d)
            {
                auto mode = mode_for(d);
                std::string dt = delta_tag(deltas[d]);
                std::vector<std::pair<std::size_t, DensitySeries>> coarse;
                json fits;
                for (std::size_t s = 0; s < sizes.size(); ++s)
                {
                    auto v = pooled_vectors(power[d][s], mode);
                    if (v.empty())
                        continue;
                    std::string tag = "n=" + std::to_string(sizes[s]);
                    if (tails)
                    {
                        out.write("tail_ccdf_" + dt + "_" + tag + ".csv", ccdf_csv(positive_ccdf(v)));
                        try
                        {
                            fits[tag] = json::parse(to_json(fit_tail(v)));
                        }
                        catch (InsufficientTailSamples const&)
                        {
                            fits[tag] = nullptr;
                        }
                    }
                    else
                    {
                        out.write("density_" + dt + "_" + tag + ".csv",
                                  density_csv({histogram(v, opts.plot_bin_width, mode, tag)}));
                        coarse.emplace_back(sizes[s], histogram(v, opts.s_bin_width, mode, tag));
                    }
                }
                if (cavity[d])
                {
                    auto v = normalize(cavity[d]->samples.v, mode);
                    if (tails)
                    {
                        out.write("tail_ccdf_" + dt + "_cavity.csv", ccdf_csv(positive_ccdf(v)));
                        try
                        {
                            fits["cavity"] = json::parse(to_json(fit_tail(v)));
                        }
                        catch (InsufficientTailSamples const&)
                        {
                            fits["cavity"] = nullptr;
                        }
                    }
                    else
                    {
                        out.write("density_" + dt + "_cavity.csv",
                                  density_csv({histogram(v, opts.plot_bin_width, mode, "cavity")}));
                        if (!coarse.empty())
                        {
                            auto cmp = compare_methods(coarse, histogram(v, opts.s_bin_width, mode, "cavity"));
                            std::ostringstream os;
                            os << "n,S\n";
                            for (auto const& [n, sv] : cmp.S)
                                os << n << ',' << format_g17(sv) << '\n';
                            out.write("convergence_" + dt + ".csv", os.str());
                            manifest.comparisons.emplace_back(deltas[d], cmp);
                        }
                    }
                }
                if (tails)
                    out.write("tail_fits_" + dt + ".json", fits.dump(2) + "\n");
            }
            break;
        }
        case Recipe::degree_decomposition: {
            for (std::size_t d = 0; d < deltas.size(); ++d)
            {
                auto mode = mode_for(d);
                std::string dt = delta_tag(deltas[d]);
                auto emit = [&](std::vector<double> const& v, std::vector<int> const& k, std::string const& name) {
                    std::vector<DensitySeries> series;
                    series.push_back(histogram(v, opts.plot_bin_width, mode, "all"));
                    for (auto& [deg, ds] : decompose_by_degree(v, k, opts.plot_bin_width, mode))
                        series.push_back(std::move(ds));
                    out.write("degree_density_" + dt + "_" + name + ".csv", density_csv(series));
                };
                for (std::size_t s = 0; s < sizes.size(); ++s)
                {
                    std::vector<int> k;
                    auto v = pooled_vectors(power[d][s], mode, &k);
                    if (!v.empty())
                        emit(v, k, "n=" + std::to_string(sizes[s]));
                }
                if (cavity[d])
                    emit(normalize(cavity[d]->samples.v, mode), cavity[d]->samples.degree, "cavity");
            }
            break;
        }
        case Recipe::cavity_field_density: {
            for (std::size_t d = 0; d < deltas.size(); ++d)
            {
                if (!cavity[d])
                    continue;
                auto const& pop = *cavity[d]->search.population;
                out.write("field_density_" + delta_tag(deltas[d]) + ".csv",
                          density_csv({histogram(pop.A(), opts.plot_bin_width, NormalizationMode::raw, "A_cavity"),
                                       histogram(cavity[d]->samples.A, opts.plot_bin_width, NormalizationMode::raw,
                                                 "A_node")}));
            }
            break;
        }
    }

    manifest.outputs = out.inventory();
    manifest.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    std::ofstream mf(dir / "manifest.json");
    mf << manifest.to_json() << '\n';
    return manifest;
}

}  // namespace speccav
