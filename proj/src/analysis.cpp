#include "speccav/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "speccav/errors.hpp"
#include "speccav/format.hpp"

namespace speccav {

char const* to_string(NormalizationMode m)
{
    switch (m)
    {
        case NormalizationMode::variance_unit:
            return "variance_unit";
        case NormalizationMode::abs_mean_unit:
            return "abs_mean_unit";
        case NormalizationMode::raw:
            return "raw";
    }
    return "";
}

NormalizationMode parse_normalization(std::string const& s)
{
    if (s == "variance_unit")
        return NormalizationMode::variance_unit;
    if (s == "abs_mean_unit")
        return NormalizationMode::abs_mean_unit;
    if (s == "raw")
        return NormalizationMode::raw;
    throw std::invalid_argument("unknown normalization mode '" + s + "'");
}

std::vector<double> normalize(std::span<double const> values, NormalizationMode mode)
{
    if (values.empty())
        throw std::invalid_argument("cannot normalize an empty sequence");
    std::vector<double> out(values.begin(), values.end());
    if (mode == NormalizationMode::raw)
        return out;

    double n = static_cast<double>(values.size());
    double scale = 0;
    if (mode == NormalizationMode::variance_unit)
    {
        for (double v : values)
            scale += v * v;
        scale = std::sqrt(scale / n);
    }
    else
    {
        for (double v : values)
            scale += std::abs(v);
        scale /= n;
    }
    if (!(scale > 0))
        throw AllZeroInput(std::string("normalization ") + to_string(mode) + " needs a nonzero moment");
    for (double& v : out)
        v /= scale;
    return out;
}

std::int64_t DensitySeries::count_at(std::int64_t bin) const
{
    if (counts.empty() || bin < first_bin || bin > last_bin())
        return 0;
    return counts[static_cast<std::size_t>(bin - first_bin)];
}

double DensitySeries::density_at(std::int64_t bin) const
{
    if (total == 0)
        return 0.0;
    return static_cast<double>(count_at(bin)) / (static_cast<double>(total) * bin_width);
}

namespace {

std::int64_t bin_index(double v, double origin, double width)
{
    return static_cast<std::int64_t>(std::floor((v - origin) / width));
}

std::int64_t floor_div(std::int64_t a, std::int64_t b)
{
    std::int64_t q = a / b;
    return (a % b != 0 && ((a < 0) != (b < 0))) ? q - 1 : q;
}

}  // namespace

DensitySeries histogram(std::span<double const> values, double bin_width, NormalizationMode mode, std::string tag, double origin)
{
    if (!(bin_width > 0))
        throw std::invalid_argument("bin width must be positive");
    DensitySeries d;
    d.bin_width = bin_width;
    d.origin = origin;
    d.normalization_mode = mode;
    d.tag = std::move(tag);

    std::vector<std::int64_t> bins;
    bins.reserve(values.size());
    for (double v : values)
        if (std::isfinite(v))
            bins.push_back(bin_index(v, origin, bin_width));
    if (bins.empty())
        return d;
    auto [lo, hi] = std::minmax_element(bins.begin(), bins.end());
    d.first_bin = *lo;
    d.counts.assign(static_cast<std::size_t>(*hi - *lo + 1), 0);
    for (auto b : bins)
        ++d.counts[static_cast<std::size_t>(b - d.first_bin)];
    d.total = static_cast<std::int64_t>(bins.size());
    return d;
}

DensitySeries rebin(DensitySeries const& d, int factor)
{
    if (factor < 1)
        throw std::invalid_argument("rebin factor must be >= 1");
    DensitySeries out = d;
    out.bin_width = d.bin_width * factor;
    out.counts.clear();
    if (d.counts.empty())
        return out;
    out.first_bin = floor_div(d.first_bin, factor);
    std::int64_t last = floor_div(d.last_bin(), factor);
    out.counts.assign(static_cast<std::size_t>(last - out.first_bin + 1), 0);
    for (std::int64_t b = d.first_bin; b <= d.last_bin(); ++b)
        out.counts[static_cast<std::size_t>(floor_div(b, factor) - out.first_bin)] += d.count_at(b);
    return out;
}

double convergence_S(DensitySeries const& a_in, DensitySeries const& b_in)
{
    DensitySeries a = a_in;
    DensitySeries b = b_in;
    if (!(a.bin_width > 0) || !(b.bin_width > 0))
        throw IncompatibleBinning("density series without a bin width");

    auto same = [](double x, double y) { return std::abs(x - y) <= 1e-12 * std::max(std::abs(x), std::abs(y)); };
    if (!same(a.bin_width, b.bin_width))
    {
        bool a_finer = a.bin_width < b.bin_width;
        double ratio = a_finer ? b.bin_width / a.bin_width : a.bin_width / b.bin_width;
        long factor = std::lround(ratio);
        if (factor < 2 || std::abs(ratio - static_cast<double>(factor)) > 1e-9 * ratio)
            throw IncompatibleBinning("bin widths are not integer multiples of each other");
        if (a_finer)
            a = rebin(a, static_cast<int>(factor));
        else
            b = rebin(b, static_cast<int>(factor));
    }
    double w = a.bin_width;
    double shift = (b.origin - a.origin) / w;
    long offset = std::lround(shift);
    if (std::abs(shift - static_cast<double>(offset)) > 1e-9)
        throw IncompatibleBinning("bin origins are not aligned");

    // b's bin m sits at a's bin m + offset
    std::int64_t lo = std::numeric_limits<std::int64_t>::max();
    std::int64_t hi = std::numeric_limits<std::int64_t>::min();
    if (!a.counts.empty())
    {
        lo = std::min(lo, a.first_bin);
        hi = std::max(hi, a.last_bin());
    }
    if (!b.counts.empty())
    {
        lo = std::min(lo, b.first_bin + offset);
        hi = std::max(hi, b.last_bin() + offset);
    }
    double s = 0;
    for (std::int64_t m = lo; m <= hi && lo <= hi; ++m)
    {
        double diff = a.density_at(m) - b.density_at(m - offset);
        s += diff * diff;
    }
    return s;
}

namespace {

struct LinearFit
{
    double slope = 0;
    double intercept = 0;
    double sse = 0;
    double sst = 0;
};

LinearFit linear_regression(std::span<double const> x, std::span<double const> y)
{
    double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LinearFit f;
    f.slope = sxx > 0 ? sxy / sxx : 0.0;
    f.intercept = my - f.slope * mx;
    for (std::size_t i = 0; i < x.size(); ++i)
    {
        double r = y[i] - f.slope * x[i] - f.intercept;
        f.sse += r * r;
    }
    f.sst = syy;
    return f;
}

}  // namespace

ScalingFit fit_scaling(std::span<std::pair<double, double> const> size_and_lambda)
{
    std::set<double> distinct;
    std::vector<double> logn, y;
    for (auto const& [n, lam] : size_and_lambda)
    {
        if (!(n > 0) || !(lam > 0))
            throw std::invalid_argument("scaling fit needs positive sizes and eigenvalues");
        distinct.insert(n);
        logn.push_back(std::log(n));
        y.push_back(std::log(lam));
    }
    if (distinct.size() < 4)
        throw std::invalid_argument("scaling fit needs at least 4 distinct sizes");

    std::vector<double> x(y.size());
    auto at = [&](double beta) {
        for (std::size_t i = 0; i < x.size(); ++i)
            x[i] = std::exp(-beta * logn[i]);
        return linear_regression(x, y);
    };

    constexpr double beta_lo = 0.05, beta_hi = 2.0;
    constexpr int grid = 400;
    std::vector<double> sse(grid + 1);
    int best = 0;
    for (int g = 0; g <= grid; ++g)
    {
        sse[g] = at(beta_lo + (beta_hi - beta_lo) * g / grid).sse;
        if (sse[g] < sse[best])
            best = g;
    }
    auto [mn, mx] = std::minmax_element(sse.begin(), sse.end());
    double sst = at(1.0).sst;
    if (!(sst > 0) || *mx - *mn <= 1e-12 * sst)
    {
        // report the beta range that fits equally well
        double tol = *mn + 1e-12 * std::max(sst, 1e-300);
        int first = 0, last = grid;
        while (first < grid && sse[first] > tol)
            ++first;
        while (last > 0 && sse[last] > tol)
            --last;
        throw DegenerateFit("scaling fit is flat in beta",
                            beta_lo + (beta_hi - beta_lo) * first / grid,
                            beta_lo + (beta_hi - beta_lo) * last / grid);
    }

    // golden-section refinement around the best grid point
    double h = (beta_hi - beta_lo) / grid;
    double a = std::max(beta_lo, beta_lo + h * (best - 1));
    double b = std::min(beta_hi, beta_lo + h * (best + 1));
    double const invphi = (std::sqrt(5.0) - 1) / 2;
    double c = b - invphi * (b - a);
    double d = a + invphi * (b - a);
    double fc = at(c).sse, fd = at(d).sse;
    while (b - a > 1e-13)
    {
        if (fc <= fd)
        {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = at(c).sse;
        }
        else
        {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = at(d).sse;
        }
    }
    double beta = 0.5 * (a + b);
    auto lf = at(beta);
    ScalingFit out;
    out.A = lf.slope;
    out.B = lf.intercept;
    out.beta = beta;
    out.sse = lf.sse;
    out.lambda_infinity = std::exp(out.B);
    return out;
}

TailFit fit_tail(std::span<double const> values, std::pair<double, double> window)
{
    auto [qlo, qhi] = window;
    if (!(qlo >= 0 && qlo < qhi && qhi <= 1))
        throw std::invalid_argument("tail window must satisfy 0 <= lower < upper <= 1");
    if (values.size() < 10000)
        throw InsufficientTailSamples("tail fit needs at least 10^4 samples, got " + std::to_string(values.size()));
    std::vector<double> pos;
    for (double v : values)
        if (v > 0 && std::isfinite(v))
            pos.push_back(v);
    if (pos.empty())
        throw InsufficientTailSamples("no positive samples for the tail fit");
    std::sort(pos.begin(), pos.end());

    double m = static_cast<double>(pos.size());
    auto first = static_cast<std::size_t>(std::ceil(qlo * m));
    auto last = static_cast<std::size_t>(std::ceil(qhi * m));  // exclusive
    last = std::min(last, pos.size());
    std::vector<double> lx, ly;
    for (std::size_t i = first; i < last; ++i)
    {
        lx.push_back(std::log(pos[i]));
        ly.push_back(std::log((m - static_cast<double>(i)) / m));
    }
    if (lx.size() < 3)
        throw InsufficientTailSamples("fewer than 3 points inside the tail window");
    auto lf = linear_regression(lx, ly);
    TailFit out;
    out.slope = lf.slope;
    out.alpha = -lf.slope;
    out.fit_window = window;
    out.r_squared = lf.sst > 0 ? 1 - lf.sse / lf.sst : 0.0;
    out.points = lx.size();
    return out;
}

std::vector<std::pair<double, double>> positive_ccdf(std::span<double const> values, std::size_t max_points)
{
    std::vector<double> pos;
    for (double v : values)
        if (v > 0 && std::isfinite(v))
            pos.push_back(v);
    std::sort(pos.begin(), pos.end());
    std::vector<std::pair<double, double>> out;
    if (pos.empty() || max_points == 0)
        return out;
    double m = static_cast<double>(pos.size());
    std::size_t last_index = pos.size();
    // ranks counted from the top, log-spaced so the tail is well resolved
    for (std::size_t p = 0; p < max_points; ++p)
    {
        double frac = static_cast<double>(p) / static_cast<double>(std::max<std::size_t>(max_points - 1, 1));
        auto from_top = static_cast<std::size_t>(std::llround(std::pow(m, frac)));
        from_top = std::clamp<std::size_t>(from_top, 1, pos.size());
        std::size_t i = pos.size() - from_top;
        if (i == last_index)
            continue;
        last_index = i;
        out.emplace_back(pos[i], (m - static_cast<double>(i)) / m);
    }
    std::reverse(out.begin(), out.end());
    return out;
}

std::map<int, DensitySeries> decompose_by_degree(std::span<double const> values,
                                                 std::span<int const> degrees,
                                                 double bin_width,
                                                 NormalizationMode mode,
                                                 double origin)
{
    if (values.size() != degrees.size())
        throw std::invalid_argument("every sample needs a degree tag");
    auto all = histogram(values, bin_width, mode, {}, origin);
    std::map<int, DensitySeries> out;
    for (std::size_t i = 0; i < values.size(); ++i)
    {
        if (!std::isfinite(values[i]))
            continue;
        auto [it, inserted] = out.try_emplace(degrees[i]);
        auto& d = it->second;
        if (inserted)
        {
            d.bin_width = bin_width;
            d.origin = origin;
            d.first_bin = all.first_bin;
            d.counts.assign(all.counts.size(), 0);
            d.normalization_mode = mode;
            d.tag = "k=" + std::to_string(degrees[i]);
        }
        ++d.counts[static_cast<std::size_t>(bin_index(values[i], origin, bin_width) - all.first_bin)];
        ++d.total;
    }
    return out;
}

NormalizationMode choose_normalization(bool two_point_spec, double delta, std::optional<double> tail_alpha)
{
    if (two_point_spec)
        return delta < 0.7 ? NormalizationMode::abs_mean_unit : NormalizationMode::variance_unit;
    if (tail_alpha && *tail_alpha < 2)
        return NormalizationMode::abs_mean_unit;
    return NormalizationMode::variance_unit;
}

void write_density_csv(std::ostream& os, DensitySeries const& d, bool log_density, bool header)
{
    if (header)
        os << "bin_center,density,count,tag\n";
    if (d.counts.empty())
        return;
    for (std::int64_t b = d.first_bin; b <= d.last_bin(); ++b)
    {
        os << format_g17(d.bin_center(b)) << ',';
        auto c = d.count_at(b);
        if (!log_density)
            os << format_g17(d.density_at(b));
        else if (c > 0)
            os << format_g17(std::log(d.density_at(b)));
        os << ',' << c << ',' << d.tag << '\n';
    }
}

std::string to_json(ScalingFit const& f)
{
    nlohmann::ordered_json j;
    j["A"] = f.A;
    j["B"] = f.B;
    j["beta"] = f.beta;
    j["sse"] = f.sse;
    j["lambda_infinity"] = f.lambda_infinity;
    return j.dump();
}

std::string to_json(TailFit const& f)
{
    nlohmann::ordered_json j;
    j["alpha"] = f.alpha;
    j["slope"] = f.slope;
    j["fit_window"] = {f.fit_window.first, f.fit_window.second};
    j["r_squared"] = f.r_squared;
    j["points"] = f.points;
    return j.dump();
}

}  // namespace speccav
