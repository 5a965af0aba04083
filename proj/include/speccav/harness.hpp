#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "speccav/analysis.hpp"
#include "speccav/cavity.hpp"
#include "speccav/degree_spec.hpp"
#include "speccav/power.hpp"

namespace speccav {

char const* version();

enum class Recipe
{
    lambda_vs_delta,
    scaling_fit,
    eigvec_density,
    degree_decomposition,
    cavity_field_density,
    laplacian_table,
    tail_comparison,
};

char const* to_string(Recipe r);
Recipe parse_recipe(std::string const& s);

enum class Method
{
    power,
    cavity,
    both,
};

char const* to_string(Method m);
Method parse_method(std::string const& s);

struct ExperimentConfig
{
    Recipe recipe = Recipe::eigvec_density;
    DegreeSpec spec = DegreeSpec::two_point(4, 8, 0.9);
    std::vector<double> deltas;
    std::vector<std::size_t> sizes;
    int ensemble_count = 2000;
    std::uint64_t master_seed = 0;
    Method method = Method::both;
    std::string output_dir = ".";

    bool uses_power() const;
    bool uses_cavity() const;
};

/// Parse the JSON config. Every field must be known; missing fields keep their
/// defaults. With `env_override`, SPECCAV_SEED replaces master_seed.
ExperimentConfig parse_config(std::string const& json_text, bool env_override = true);
ExperimentConfig load_config(std::string const& path, bool env_override = true);
std::string config_to_json(ExperimentConfig const& cfg);
void validate_config(ExperimentConfig const& cfg);

struct RunOptions
{
    int workers = 1;
    int retry_budget = 3;  // extra wiring attempts per matrix task
    int max_restarts = 100;
    PowerOptions power;
    PopulationOptions population;
    std::size_t marginal_samples = 200000;
    double s_bin_width = 0.2;
    double plot_bin_width = 0.05;
};

/// Seed of one task: a stable hash of every coordinate that names it.
std::uint64_t task_seed(std::uint64_t master_seed,
                        Recipe recipe,
                        DegreeSpec const& spec,
                        double delta,
                        std::size_t n,
                        std::size_t index);

/// Search window [lo, hi] that brackets the cavity edge: hi sits above the
/// Gershgorin bound of every instance of the spec.
std::pair<double, double> default_lambda_window(DegreeSpec const& spec, MatrixVariant variant);

struct PowerTaskResult
{
    std::uint64_t seed = 0;  // seed of the attempt that succeeded
    int attempts = 0;
    std::vector<int> degrees;
    EigenResult result;
};

/// Generate and solve one instance. A wiring failure moves on to the seed
/// derive_seed(seed, attempt) until `retry_budget` extra attempts are used.
PowerTaskResult run_power_task(DegreeSpec const& spec,
                               std::size_t n,
                               double delta,
                               MatrixVariant variant,
                               std::uint64_t seed,
                               RunOptions const& opts);

struct CavityTaskResult
{
    LambdaSearchResult search;
    MarginalSamples samples;
};

/// find_lambda on the growth-rate criterion, then marginal samples from the
/// oriented stationary pool.
CavityTaskResult run_cavity_task(PopulationTemplate const& tmpl, std::uint64_t seed, RunOptions const& opts);

struct ComparisonResult
{
    std::vector<std::pair<std::size_t, double>> S;  // ascending N
    bool monotone = false;                           // strictly decreasing, or all zero
    bool degenerate = false;                         // all zero
};

ComparisonResult compare_methods(std::vector<std::pair<std::size_t, DensitySeries>> const& matrix,
                                 DensitySeries const& cavity);

struct TaskRecord
{
    std::string id;
    std::uint64_t seed = 0;
    int attempts = 0;
    double wall_seconds = 0;
    bool ok = false;
    std::string error;
};

struct OutputRecord
{
    std::string path;  // relative to output_dir
    std::string sha256;
    std::uintmax_t bytes = 0;
};

struct RunManifest
{
    ExperimentConfig config;
    RunOptions options;
    std::string version;
    std::vector<TaskRecord> tasks;
    std::vector<std::pair<double, ComparisonResult>> comparisons;  // per delta
    std::vector<OutputRecord> outputs;
    double wall_seconds = 0;

    bool failed() const;
    std::string to_json() const;
};

/// Run every task of the recipe, write its CSV/JSON artifacts and
/// manifest.json into config.output_dir.
RunManifest run_experiment(ExperimentConfig const& config, RunOptions const& opts = {});

}  // namespace speccav
