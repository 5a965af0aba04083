#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "speccav/cavity.hpp"
#include "speccav/errors.hpp"
#include "speccav/format.hpp"

namespace speccav {

namespace {

void validate(PopulationTemplate const& tmpl)
{
    if (!(tmpl.delta >= 0 && tmpl.delta <= 1))
        throw std::invalid_argument("delta must lie in [0, 1]");
    if (tmpl.variant == MatrixVariant::laplacian && tmpl.delta != 1.0)
        throw std::invalid_argument("the Laplacian population is only defined for delta = 1");
}

double mean_abs(std::vector<double> const& v)
{
    double s = 0;
    for (double x : v)
        s += std::abs(x);
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// Draws one cavity or node field from `parents` uniformly chosen pool members.
// The diagonal term of the Laplacian counts every link of the node, so it is
// passed in separately from the number of parents.
struct FieldKernel
{
    double lambda;
    double p_plus;
    double h_sign;  // -1 for the Laplacian off-diagonal
    bool laplacian;

    template<class Source>
    CavityMessage operator()(Source const& pool_A,
                             Source const& pool_H,
                             int parents,
                             int diagonal,
                             Rng& rng) const
    {
        std::size_t n = pool_A.size();
        double a = lambda - (laplacian ? diagonal : 0);
        double h = 0;
        for (int j = 0; j < parents; ++j)
        {
            std::size_t idx = rng.below(n);
            double coupling = rng.bernoulli(p_plus) ? 1.0 : -1.0;
            double pa = pool_A[idx];
            a -= 1.0 / pa;
            h += coupling * pool_H[idx] / pa;
        }
        return {a, h_sign * h};
    }
};

FieldKernel make_kernel(CavityPopulation const& pop)
{
    bool lap = pop.variant() == MatrixVariant::laplacian;
    return {pop.lambda(), (1 + pop.delta()) / 2, lap ? -1.0 : 1.0, lap};
}

[[noreturn]] void diverged(double lambda, long sweep)
{
    throw DivergedPopulation("population |A| fell below the floor at lambda=" + format_shortest(lambda) + " (sweep "
                             + std::to_string(sweep) + "); lambda is below the edge");
}

}  // namespace

CavityPopulation::CavityPopulation(PopulationTemplate tmpl, double lambda, std::size_t n_pop, Rng& rng)
    : tmpl_(std::move(tmpl)), lambda_(lambda), A_(n_pop), H_(n_pop)
{
    validate(tmpl_);
    if (n_pop < 1)
        throw std::invalid_argument("population needs at least one member");
    if (!(lambda > 0))
        throw std::invalid_argument("population initialization needs lambda > 0");
    for (std::size_t m = 0; m < n_pop; ++m)
    {
        A_[m] = rng.uniform(lambda / 2, lambda);
        H_[m] = rng.uniform(-1.0, 1.0);
    }
}

CavityPopulation::CavityPopulation(PopulationTemplate tmpl, double lambda, std::vector<double> A, std::vector<double> H)
    : tmpl_(std::move(tmpl)), lambda_(lambda), A_(std::move(A)), H_(std::move(H))
{
    validate(tmpl_);
    if (A_.size() != H_.size() || A_.empty())
        throw std::invalid_argument("population needs matching, non-empty A and H");
    for (std::size_t m = 0; m < A_.size(); ++m)
        if (!std::isfinite(A_[m]) || !std::isfinite(H_[m]))
            throw std::invalid_argument("population entries must be finite");
}

void CavityPopulation::orient()
{
    double s = std::accumulate(H_.begin(), H_.end(), 0.0);
    if (s < 0)
        for (double& h : H_)
            h = -h;
}

void population_sweep_sequential(CavityPopulation& pop, Rng& rng, bool renormalize)
{
    DiscreteSampler draw_k(edge_degree_posterior(pop.spec()));
    auto kernel = make_kernel(pop);
    double old_mean = mean_abs(pop.H_);
    for (std::size_t m = 0; m < pop.size(); ++m)
    {
        int k = draw_k(rng);
        auto f = kernel(pop.A_, pop.H_, k - 1, k, rng);
        if (!(std::abs(f.A) >= kAFloor))
            diverged(pop.lambda_, pop.sweep_ + 1);
        pop.A_[m] = f.A;
        pop.H_[m] = f.H;
    }
    double new_mean = mean_abs(pop.H_);
    pop.h_growth_ = old_mean > 0 ? new_mean / old_mean : 0.0;
    if (renormalize && new_mean > 0)
        for (double& h : pop.H_)
            h /= new_mean;
    ++pop.sweep_;
}

void population_sweep_parallel(CavityPopulation& pop, Rng& rng, bool renormalize)
{
    DiscreteSampler draw_k(edge_degree_posterior(pop.spec()));
    auto kernel = make_kernel(pop);
    std::vector<double> const old_A = pop.A_;
    std::vector<double> const old_H = pop.H_;
    double old_mean = mean_abs(old_H);
    for (std::size_t m = 0; m < pop.size(); ++m)
    {
        int k = draw_k(rng);
        auto f = kernel(old_A, old_H, k - 1, k, rng);
        if (!(std::abs(f.A) >= kAFloor))
            diverged(pop.lambda_, pop.sweep_ + 1);
        pop.A_[m] = f.A;
        pop.H_[m] = f.H;
    }
    double new_mean = mean_abs(pop.H_);
    pop.h_growth_ = old_mean > 0 ? new_mean / old_mean : 0.0;
    if (renormalize && new_mean > 0)
        for (double& h : pop.H_)
            h /= new_mean;
    ++pop.sweep_;
}

MarginalSamples sample_marginals(CavityPopulation const& pop, std::size_t count, Rng& rng)
{
    DiscreteSampler draw_k(pop.spec().pmf());
    auto kernel = make_kernel(pop);
    MarginalSamples out;
    out.A.reserve(count);
    out.H.reserve(count);
    out.v.reserve(count);
    out.degree.reserve(count);
    // cap on consecutive rejections so a diverged pool cannot spin forever
    std::size_t const max_rejected = 10 * count + 1000;
    while (out.A.size() < count)
    {
        int k = draw_k(rng);
        auto f = kernel(pop.A(), pop.H(), k, k, rng);
        if (!(f.A > kAFloor))
        {
            if (++out.rejected > max_rejected)
                throw DivergedPopulation("too many marginal samples with A below the floor");
            continue;
        }
        out.A.push_back(f.A);
        out.H.push_back(f.H);
        out.v.push_back(f.H / f.A);
        out.degree.push_back(k);
    }
    return out;
}

double statistic_T(MarginalSamples const& s)
{
    double t = 0;
    for (double v : s.v)
        t += v * v;
    return s.v.empty() ? 0.0 : t / static_cast<double>(s.v.size());
}

double statistic_U(MarginalSamples const& s)
{
    return mean_abs(s.v);
}

char const* to_string(LambdaCriterion c)
{
    switch (c)
    {
        case LambdaCriterion::growth_rate:
            return "growth_rate";
        case LambdaCriterion::T_unit:
            return "T_unit";
        case LambdaCriterion::U_unit:
            return "U_unit";
    }
    return "";
}

LambdaCriterion parse_criterion(std::string const& s)
{
    if (s == "growth_rate")
        return LambdaCriterion::growth_rate;
    if (s == "T_unit")
        return LambdaCriterion::T_unit;
    if (s == "U_unit")
        return LambdaCriterion::U_unit;
    throw std::invalid_argument("unknown lambda criterion '" + s + "'");
}

LambdaCriterion select_unit_criterion(double tail_alpha)
{
    return tail_alpha < 2 ? LambdaCriterion::U_unit : LambdaCriterion::T_unit;
}

TrialRecord evaluate_trial(PopulationTemplate const& tmpl,
                           double lambda,
                           PopulationOptions const& opts,
                           std::uint64_t seed,
                           std::optional<CavityPopulation>* keep)
{
    TrialRecord rec;
    rec.lambda = lambda;
    Rng rng(seed);
    CavityPopulation pop(tmpl, lambda, opts.n_pop, rng);
    // log of the H scale the pool would have without renormalization
    double log_scale = std::log(mean_abs(pop.H()));
    double growth_sum = 0;
    try
    {
        int total = opts.burn_in + opts.measure;
        for (int s = 0; s < total; ++s)
        {
            if (opts.strategy == UpdateStrategy::sequential)
                population_sweep_sequential(pop, rng);
            else
                population_sweep_parallel(pop, rng);
            log_scale += std::log(pop.h_growth());
            if (s >= opts.burn_in)
                growth_sum += pop.h_growth();
        }
    }
    catch (DivergedPopulation const&)
    {
        rec.diverged = true;
        rec.h_growth = std::numeric_limits<double>::quiet_NaN();
        rec.T = rec.U = rec.log_T = rec.log_U = std::numeric_limits<double>::quiet_NaN();
        return rec;
    }
    rec.h_growth = opts.measure > 0 ? growth_sum / opts.measure : pop.h_growth();

    std::size_t n_samples = opts.marginal_samples ? opts.marginal_samples : opts.n_pop;
    MarginalSamples samples;
    try
    {
        samples = sample_marginals(pop, n_samples, rng);
    }
    catch (DivergedPopulation const&)
    {
        rec.diverged = true;
        rec.h_growth = std::numeric_limits<double>::quiet_NaN();
        rec.T = rec.U = rec.log_T = rec.log_U = std::numeric_limits<double>::quiet_NaN();
        return rec;
    }
    rec.log_T = std::log(statistic_T(samples)) + 2 * log_scale;
    rec.log_U = std::log(statistic_U(samples)) + log_scale;
    rec.T = std::exp(rec.log_T);
    rec.U = std::exp(rec.log_U);
    if (keep)
        keep->emplace(std::move(pop));
    return rec;
}

namespace {

double score(TrialRecord const& r, LambdaCriterion c)
{
    switch (c)
    {
        case LambdaCriterion::growth_rate:
            return std::log(r.h_growth);
        case LambdaCriterion::T_unit:
            return r.log_T;
        case LambdaCriterion::U_unit:
            return r.log_U;
    }
    return 0;
}

// "below the edge": diverged, or the statistic says the eigenvector mode grows
bool below(TrialRecord const& r, LambdaCriterion c)
{
    return r.diverged || !(score(r, c) <= 0);
}

}  // namespace

LambdaSearchResult find_lambda(PopulationTemplate const& tmpl,
                               double lo,
                               double hi,
                               LambdaCriterion criterion,
                               PopulationOptions const& opts,
                               std::uint64_t seed)
{
    validate(tmpl);
    if (!(lo > 0 && hi > lo))
        throw std::invalid_argument("lambda window must satisfy 0 < lo < hi");
    if (!(opts.tol_lambda > 0))
        throw std::invalid_argument("tol_lambda must be positive");

    LambdaSearchResult out;
    out.criterion = criterion;
    std::uint64_t trial_seed = derive_seed(seed, "lambda-trial");
    auto run = [&](double lambda) {
        out.trials.push_back(evaluate_trial(tmpl, lambda, opts, trial_seed));
        if (static_cast<int>(out.trials.size()) > opts.max_trials)
            throw NoConvergence("lambda search exceeded " + std::to_string(opts.max_trials) + " trials");
        return out.trials.back();
    };

    TrialRecord upper = run(hi);
    if (below(upper, criterion))
        throw EdgeNotBracketed("upper end of the lambda window (" + format_shortest(hi)
                               + ") is not above the edge");
    TrialRecord lower = run(lo);
    if (!below(lower, criterion))
        throw EdgeNotBracketed("lower end of the lambda window (" + format_shortest(lo)
                               + ") is already above the edge");

    while (upper.lambda - lower.lambda > opts.tol_lambda)
    {
        TrialRecord mid = run(0.5 * (lower.lambda + upper.lambda));
        if (below(mid, criterion))
            lower = mid;
        else
            upper = mid;
    }

    if (lower.diverged || !std::isfinite(score(lower, criterion)))
    {
        out.edge_limited = true;
        out.lambda_hat = upper.lambda;
    }
    else
    {
        double s_lo = score(lower, criterion);
        double s_hi = score(upper, criterion);
        out.lambda_hat = lower.lambda + (upper.lambda - lower.lambda) * s_lo / (s_lo - s_hi);
    }

    // monotonicity over clearly separated trials only
    std::vector<TrialRecord> sorted = out.trials;
    std::sort(sorted.begin(), sorted.end(), [](auto const& a, auto const& b) { return a.lambda < b.lambda; });
    for (std::size_t a = 0; a < sorted.size(); ++a)
    {
        for (std::size_t b = a + 1; b < sorted.size(); ++b)
        {
            if (sorted[b].lambda - sorted[a].lambda <= std::max(10 * opts.tol_lambda, opts.monotone_margin))
                continue;
            // the side of the edge must not flip back, and above the edge
            // the statistic must keep falling
            bool a_below = below(sorted[a], criterion);
            bool b_below = below(sorted[b], criterion);
            bool bad = (b_below && !a_below)
                       || (!a_below && !b_below && score(sorted[b], criterion) > score(sorted[a], criterion));
            if (bad)
                throw NonMonotoneStatistic(std::string(to_string(criterion)) + " is not monotone in lambda between "
                                           + format_shortest(sorted[a].lambda) + " and "
                                           + format_shortest(sorted[b].lambda));
        }
    }

    std::optional<CavityPopulation> pop;
    auto final_trial = evaluate_trial(tmpl, out.lambda_hat, opts, trial_seed, &pop);
    if (final_trial.diverged)
    {
        out.lambda_hat = upper.lambda;
        out.edge_limited = true;
        final_trial = evaluate_trial(tmpl, out.lambda_hat, opts, trial_seed, &pop);
    }
    out.trials.push_back(final_trial);
    out.population = std::move(pop);
    return out;
}

void write_population(std::ostream& os, CavityPopulation const& pop)
{
    os << "lambda=" << format_shortest(pop.lambda()) << " sweep=" << pop.sweep() << " variant="
       << to_string(pop.variant()) << '\n';
    for (std::size_t m = 0; m < pop.size(); ++m)
        os << format_shortest(pop.A()[m]) << ' ' << format_shortest(pop.H()[m]) << '\n';
}

CavityPopulation read_population(std::istream& is, PopulationTemplate tmpl)
{
    std::string header;
    if (!std::getline(is, header))
        throw std::invalid_argument("population snapshot is empty");
    std::istringstream hs(header);
    std::string token;
    double lambda = 0;
    bool have_lambda = false;
    while (hs >> token)
    {
        auto eq = token.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("malformed population header token '" + token + "'");
        auto key = token.substr(0, eq);
        auto value = token.substr(eq + 1);
        if (key == "lambda")
        {
            lambda = std::stod(value);
            have_lambda = true;
        }
        else if (key == "variant")
        {
            if (parse_variant(value) != tmpl.variant)
                throw std::invalid_argument("population snapshot variant does not match");
        }
        else if (key != "sweep")
        {
            throw std::invalid_argument("unknown population header key '" + key + "'");
        }
    }
    if (!have_lambda)
        throw std::invalid_argument("population header must carry lambda");
    std::vector<double> A, H;
    double a, h;
    while (is >> a >> h)
    {
        A.push_back(a);
        H.push_back(h);
    }
    return CavityPopulation(std::move(tmpl), lambda, std::move(A), std::move(H));
}

void write_trials_csv(std::ostream& os, std::vector<TrialRecord> const& trials)
{
    os << "trial_lambda,h_growth,T,U,status\n";
    for (auto const& t : trials)
    {
        os << format_g17(t.lambda) << ',';
        if (t.diverged)
            os << ",,,diverged\n";
        else
            os << format_g17(t.h_growth) << ',' << format_g17(t.T) << ',' << format_g17(t.U) << ",stable\n";
    }
}

}  // namespace speccav
