#include "speccav/degree_spec.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "speccav/format.hpp"

namespace speccav {

namespace {

std::vector<std::string> split(std::string const& s, char sep)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep))
        out.push_back(item);
    return out;
}

int parse_int(std::string const& s)
{
    std::size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size())
        throw std::invalid_argument("not an integer: '" + s + "'");
    return v;
}

double parse_real(std::string const& s)
{
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size())
        throw std::invalid_argument("not a number: '" + s + "'");
    return v;
}

}  // namespace

DegreeSpec DegreeSpec::two_point(int k_small, int k_large, double ratio_small)
{
    if (k_small < 0 || k_small >= k_large)
        throw std::invalid_argument("two_point requires 0 <= k_small < k_large");
    if (!(ratio_small > 0 && ratio_small < 1))
        throw std::invalid_argument("two_point requires 0 < ratio_small < 1");

    DegreeSpec s;
    s.kind_ = DegreeKind::two_point;
    s.k_small_ = k_small;
    s.k_large_ = k_large;
    s.ratio_small_ = ratio_small;
    s.k_max_ = k_large;
    s.pmf_.assign(k_large + 1, 0.0);
    s.pmf_[k_small] = ratio_small;
    s.pmf_[k_large] = 1 - ratio_small;
    return s;
}

DegreeSpec DegreeSpec::truncated_poisson(double rate, int k_max)
{
    if (!(rate > 0) || !std::isfinite(rate))
        throw std::invalid_argument("truncated_poisson requires a positive rate");
    if (k_max < 1)
        throw std::invalid_argument("truncated_poisson requires k_max >= 1");

    DegreeSpec s;
    s.kind_ = DegreeKind::truncated_poisson;
    s.rate_ = rate;
    s.k_max_ = k_max;
    s.pmf_.resize(k_max + 1);
    // Poisson terms via log-gamma to stay finite for larger k_max
    for (int k = 0; k <= k_max; ++k)
        s.pmf_[k] = std::exp(k * std::log(rate) - rate - std::lgamma(k + 1.0));
    s.normalizer_ = std::accumulate(s.pmf_.begin(), s.pmf_.end(), 0.0);
    for (double& p : s.pmf_)
        p /= s.normalizer_;
    return s;
}

DegreeSpec DegreeSpec::regular(int k)
{
    if (k < 1)
        throw std::invalid_argument("regular requires k >= 1");
    DegreeSpec s;
    s.kind_ = DegreeKind::regular;
    s.k_small_ = s.k_large_ = s.k_max_ = k;
    s.pmf_.assign(k + 1, 0.0);
    s.pmf_[k] = 1.0;
    return s;
}

DegreeSpec DegreeSpec::parse(std::string const& text)
{
    auto colon = text.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("degree spec must look like kind:params, got '" + text + "'");
    std::string kind = text.substr(0, colon);
    auto params = split(text.substr(colon + 1), ',');

    try
    {
        if (kind == "two_point" || kind == "2dtd")
        {
            if (params.size() != 3)
                throw std::invalid_argument("two_point takes k_small,k_large,ratio_small");
            return two_point(parse_int(params[0]), parse_int(params[1]), parse_real(params[2]));
        }
        if (kind == "tpoisson" || kind == "truncated_poisson")
        {
            if (params.size() != 2)
                throw std::invalid_argument("tpoisson takes rate,k_max");
            return truncated_poisson(parse_real(params[0]), parse_int(params[1]));
        }
        if (kind == "regular")
        {
            if (params.size() != 1)
                throw std::invalid_argument("regular takes k");
            return regular(parse_int(params[0]));
        }
    }
    catch (std::out_of_range const&)
    {
        throw std::invalid_argument("degree spec parameter out of range in '" + text + "'");
    }
    throw std::invalid_argument("unknown degree spec kind '" + kind + "'");
}

double DegreeSpec::pk(int k) const
{
    if (k < 0 || k > k_max_)
        return 0.0;
    return pmf_[k];
}

double DegreeSpec::mean() const
{
    double m = 0;
    for (int k = 0; k <= k_max_; ++k)
        m += k * pmf_[k];
    return m;
}

std::string DegreeSpec::to_string() const
{
    switch (kind_)
    {
        case DegreeKind::two_point:
            return "two_point:" + std::to_string(k_small_) + "," + std::to_string(k_large_) + ","
                   + format_shortest(ratio_small_);
        case DegreeKind::truncated_poisson:
            return "tpoisson:" + format_shortest(rate_) + "," + std::to_string(k_max_);
        case DegreeKind::regular:
            return "regular:" + std::to_string(k_max_);
    }
    return {};
}

std::vector<double> edge_degree_posterior(DegreeSpec const& spec)
{
    double mean = spec.mean();
    if (!(mean > 0))
        throw std::invalid_argument("edge-degree posterior needs a positive mean degree");
    std::vector<double> r(spec.k_max() + 1);
    for (int k = 0; k <= spec.k_max(); ++k)
        r[k] = k * spec.pk(k) / mean;
    return r;
}

DiscreteSampler::DiscreteSampler(std::vector<double> const& weights)
{
    double total = 0;
    for (std::size_t k = 0; k < weights.size(); ++k)
    {
        if (weights[k] < 0)
            throw std::invalid_argument("negative weight in discrete sampler");
        if (weights[k] > 0)
        {
            total += weights[k];
            values_.push_back(static_cast<int>(k));
            cumulative_.push_back(total);
        }
    }
    if (values_.empty())
        throw std::invalid_argument("discrete sampler needs a positive weight");
    for (double& c : cumulative_)
        c /= total;
    cumulative_.back() = 1.0;
}

int DiscreteSampler::operator()(Rng& rng) const
{
    double u = rng.uniform();
    std::size_t i = 0;
    while (u >= cumulative_[i])
        ++i;
    return values_[i];
}

}  // namespace speccav
