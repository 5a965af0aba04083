#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "speccav/degree_spec.hpp"
#include "speccav/graph.hpp"

namespace speccav {

enum class MatrixVariant
{
    adjacency,
    laplacian,
};

char const* to_string(MatrixVariant v);
MatrixVariant parse_variant(std::string const& s);

/// CSR form of J (or of the Laplacian) built once from the edge list.
class SymmetricOperator
{
  public:
    explicit SymmetricOperator(GraphInstance const& g);
    explicit SymmetricOperator(LaplacianView const& l);

    std::size_t size() const { return diagonal_.size(); }

    /// y = (M + shift I) x
    void apply(std::span<double const> x, std::span<double> y, double shift = 0) const;

    /// Upper bound on |eigenvalue| from Gershgorin discs.
    double gershgorin_bound() const;

    bool isolated(std::size_t i) const { return row_ptr_[i] == row_ptr_[i + 1]; }

  private:
    void build(GraphInstance const& g, int off_sign);

    std::vector<std::size_t> row_ptr_;
    std::vector<std::uint32_t> col_;
    std::vector<double> val_;
    std::vector<double> diagonal_;
};

/// y = J x computed straight from the edge list.
std::vector<double> matvec(GraphInstance const& g, std::span<double const> x);
/// y = J^(L) x for the Laplacian view.
std::vector<double> matvec(LaplacianView const& l, std::span<double const> x);

struct EigenResult
{
    double lambda_1 = 0;        // eigenvalue of the unshifted matrix
    std::vector<double> vector;  // unit 2-norm, sum >= 0
    long iterations = 0;
    double residual = 0;  // ||M v - lambda v|| / ||v||
    double shift_eta = 0;
};

struct PowerOptions
{
    std::optional<double> eta;  // default: max degree (adjacency), 0 (Laplacian)
    double tol = 1e-10;
    long max_iter = 1'000'000;
    double start_noise = 1e-3;
};

/*!
 * Shifted power iteration on M + eta I.
 *
 * Iterates y = (M + eta I) x, c = |y|, x <- y / c from all-ones plus seeded
 * uniform noise, and stops once both |c_{k+1} - c_k| and the residual fall
 * below `tol`. Isolated nodes are pinned to zero. Throws NoConvergence.
 */
EigenResult power_iterate(GraphInstance const& g, PowerOptions const& opts, Rng& rng);
EigenResult power_iterate(LaplacianView const& l, PowerOptions const& opts, Rng& rng);
EigenResult power_iterate(SymmetricOperator const& op, double default_eta, PowerOptions const& opts, Rng& rng);

/// Flip the sign so that sum(v) >= 0, ties broken by first nonzero entry.
void apply_sign_convention(std::vector<double>& v);

struct EnsembleInstance
{
    std::uint64_t seed = 0;
    std::vector<int> degrees;
    EigenResult result;
};

struct EnsembleResult
{
    std::vector<EnsembleInstance> instances;  // ordered by instance index
    double mean = 0;
    double stderr_mean = 0;

    std::vector<double> lambdas() const;
};

struct EnsembleOptions
{
    MatrixVariant variant = MatrixVariant::adjacency;
    PowerOptions power;
    int max_restarts = 100;
    int workers = 1;
    bool keep_vectors = false;
};

/// Seed of ensemble instance `index`: derived from the master seed and a tag
/// naming spec, size and delta, so any single instance can be regenerated.
std::uint64_t ensemble_instance_seed(std::uint64_t master_seed,
                                     DegreeSpec const& spec,
                                     std::size_t n,
                                     double delta,
                                     MatrixVariant variant,
                                     std::size_t index);

/// Generate and solve `count` independent instances. Fails fast: the first
/// failing instance (by index) is rethrown with its index in the message.
EnsembleResult ensemble_first_eigenvalues(DegreeSpec const& spec,
                                          std::size_t n,
                                          double delta,
                                          std::size_t count,
                                          std::uint64_t master_seed,
                                          EnsembleOptions const& opts = {});

}  // namespace speccav
