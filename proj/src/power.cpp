#include "speccav/power.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "speccav/errors.hpp"
#include "speccav/format.hpp"
#include "speccav/parallel.hpp"

namespace speccav {

char const* to_string(MatrixVariant v)
{
    return v == MatrixVariant::adjacency ? "adjacency" : "laplacian";
}

MatrixVariant parse_variant(std::string const& s)
{
    if (s == "adjacency")
        return MatrixVariant::adjacency;
    if (s == "laplacian")
        return MatrixVariant::laplacian;
    throw std::invalid_argument("unknown matrix variant '" + s + "'");
}

SymmetricOperator::SymmetricOperator(GraphInstance const& g) : diagonal_(g.size(), 0.0)
{
    build(g, +1);
}

SymmetricOperator::SymmetricOperator(LaplacianView const& l) : diagonal_(l.size(), 0.0)
{
    build(l.base(), -1);
    for (std::size_t i = 0; i < l.size(); ++i)
        diagonal_[i] = l.diagonal()[i];
}

void SymmetricOperator::build(GraphInstance const& g, int off_sign)
{
    std::size_t n = g.size();
    row_ptr_.assign(n + 1, 0);
    for (auto const& e : g.edges())
    {
        ++row_ptr_[e.i + 1];
        ++row_ptr_[e.j + 1];
    }
    std::partial_sum(row_ptr_.begin(), row_ptr_.end(), row_ptr_.begin());
    col_.resize(row_ptr_.back());
    val_.resize(row_ptr_.back());
    std::vector<std::size_t> fill(row_ptr_.begin(), row_ptr_.end() - 1);
    for (auto const& e : g.edges())
    {
        double v = off_sign * e.coupling;
        col_[fill[e.i]] = e.j;
        val_[fill[e.i]++] = v;
        col_[fill[e.j]] = e.i;
        val_[fill[e.j]++] = v;
    }
}

void SymmetricOperator::apply(std::span<double const> x, std::span<double> y, double shift) const
{
    std::size_t n = size();
    for (std::size_t i = 0; i < n; ++i)
    {
        double acc = (diagonal_[i] + shift) * x[i];
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
            acc += val_[p] * x[col_[p]];
        y[i] = acc;
    }
}

double SymmetricOperator::gershgorin_bound() const
{
    double bound = 0;
    for (std::size_t i = 0; i < size(); ++i)
    {
        double r = std::abs(diagonal_[i]);
        for (std::size_t p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
            r += std::abs(val_[p]);
        bound = std::max(bound, r);
    }
    return bound;
}

namespace {

void check_length(std::size_t n, std::size_t got)
{
    if (n != got)
        throw std::invalid_argument("dimension mismatch: matrix is " + std::to_string(n) + ", vector is "
                                    + std::to_string(got));
}

}  // namespace

std::vector<double> matvec(GraphInstance const& g, std::span<double const> x)
{
    check_length(g.size(), x.size());
    std::vector<double> y(x.size(), 0.0);
    for (auto const& e : g.edges())
    {
        y[e.i] += e.coupling * x[e.j];
        y[e.j] += e.coupling * x[e.i];
    }
    return y;
}

std::vector<double> matvec(LaplacianView const& l, std::span<double const> x)
{
    check_length(l.size(), x.size());
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        y[i] = l.diagonal()[i] * x[i];
    for (auto const& e : l.base().edges())
    {
        y[e.i] -= e.coupling * x[e.j];
        y[e.j] -= e.coupling * x[e.i];
    }
    return y;
}

void apply_sign_convention(std::vector<double>& v)
{
    double sum = std::accumulate(v.begin(), v.end(), 0.0);
    bool flip = sum < 0;
    if (sum == 0)
    {
        auto it = std::find_if(v.begin(), v.end(), [](double x) { return x != 0; });
        flip = it != v.end() && *it < 0;
    }
    if (flip)
        for (double& x : v)
            x = -x;
}

EigenResult power_iterate(SymmetricOperator const& op, double default_eta, PowerOptions const& opts, Rng& rng)
{
    std::size_t n = op.size();
    if (n == 0)
        throw std::invalid_argument("power iteration on an empty matrix");
    double eta = opts.eta.value_or(default_eta);
    if (eta < 0)
        throw std::invalid_argument("shift eta must be non-negative");

    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        double noise = rng.uniform(-opts.start_noise, opts.start_noise);
        x[i] = op.isolated(i) ? 0.0 : 1.0 + noise;
    }
    double norm = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
    if (norm == 0)
    {
        // every node isolated: M = 0 and any unit vector is an eigenvector
        EigenResult r;
        r.vector.assign(n, 1.0 / std::sqrt(static_cast<double>(n)));
        r.shift_eta = eta;
        return r;
    }
    for (double& v : x)
        v /= norm;

    double c_prev = 0;
    for (long it = 1; it <= opts.max_iter; ++it)
    {
        op.apply(x, y, eta);
        double c = std::sqrt(std::inner_product(y.begin(), y.end(), y.begin(), 0.0));
        if (c == 0)
            throw NoConvergence("power iteration collapsed to the zero vector; increase eta");
        double res2 = 0;
        for (std::size_t i = 0; i < n; ++i)
        {
            double d = y[i] - c * x[i];
            res2 += d * d;
        }
        double residual = std::sqrt(res2);
        if (std::abs(c - c_prev) < opts.tol && residual < opts.tol)
        {
            EigenResult r;
            r.lambda_1 = c - eta;
            r.vector = std::move(x);
            r.iterations = it;
            r.residual = residual;
            r.shift_eta = eta;
            apply_sign_convention(r.vector);
            return r;
        }
        c_prev = c;
        for (std::size_t i = 0; i < n; ++i)
            x[i] = y[i] / c;
    }
    throw NoConvergence("power iteration did not converge within " + std::to_string(opts.max_iter)
                        + " iterations (eta=" + format_shortest(eta) + ")");
}

EigenResult power_iterate(GraphInstance const& g, PowerOptions const& opts, Rng& rng)
{
    return power_iterate(SymmetricOperator(g), static_cast<double>(g.max_degree()), opts, rng);
}

EigenResult power_iterate(LaplacianView const& l, PowerOptions const& opts, Rng& rng)
{
    // the Laplacian is positive semidefinite, so no shift is needed for the
    // top eigenvalue to dominate in magnitude
    return power_iterate(SymmetricOperator(l), 0.0, opts, rng);
}

std::vector<double> EnsembleResult::lambdas() const
{
    std::vector<double> out;
    out.reserve(instances.size());
    for (auto const& inst : instances)
        out.push_back(inst.result.lambda_1);
    return out;
}

std::uint64_t ensemble_instance_seed(std::uint64_t master_seed,
                                     DegreeSpec const& spec,
                                     std::size_t n,
                                     double delta,
                                     MatrixVariant variant,
                                     std::size_t index)
{
    std::string tag = spec.to_string() + "|n=" + std::to_string(n) + "|delta=" + format_shortest(delta) + "|"
                      + to_string(variant);
    return derive_seed(derive_seed(master_seed, tag), index);
}

namespace {

template<class E>
[[noreturn]] void rethrow_with_index(E const& e, std::size_t index)
{
    throw E("ensemble instance " + std::to_string(index) + ": " + e.what());
}

}  // namespace

EnsembleResult ensemble_first_eigenvalues(DegreeSpec const& spec,
                                          std::size_t n,
                                          double delta,
                                          std::size_t count,
                                          std::uint64_t master_seed,
                                          EnsembleOptions const& opts)
{
    if (count < 1)
        throw std::invalid_argument("ensemble count must be >= 1");
    if (opts.variant == MatrixVariant::laplacian && delta != 1.0)
        throw std::invalid_argument("the Laplacian ensemble requires delta = 1");

    EnsembleResult out;
    out.instances.resize(count);
    parallel_for(count, opts.workers, [&](std::size_t idx) {
        try
        {
            auto& inst = out.instances[idx];
            inst.seed = ensemble_instance_seed(master_seed, spec, n, delta, opts.variant, idx);
            auto g = generate_graph(spec, n, delta, inst.seed, opts.max_restarts);
            Rng start(derive_seed(inst.seed, "power-start"));
            inst.result = opts.variant == MatrixVariant::adjacency
                              ? power_iterate(g, opts.power, start)
                              : power_iterate(build_laplacian(g), opts.power, start);
            inst.degrees = g.degrees();
            if (!opts.keep_vectors)
                inst.result.vector = {};
        }
        catch (NoConvergence const& e)
        {
            rethrow_with_index(e, idx);
        }
        catch (RestartLimitExceeded const& e)
        {
            rethrow_with_index(e, idx);
        }
    });

    double sum = 0;
    for (auto const& inst : out.instances)
        sum += inst.result.lambda_1;
    out.mean = sum / static_cast<double>(count);
    if (count > 1)
    {
        double ss = 0;
        for (auto const& inst : out.instances)
            ss += (inst.result.lambda_1 - out.mean) * (inst.result.lambda_1 - out.mean);
        out.stderr_mean = std::sqrt(ss / static_cast<double>(count - 1) / static_cast<double>(count));
    }
    return out;
}

}  // namespace speccav
