#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace speccav {

enum class NormalizationMode
{
    variance_unit,  // (1/N) sum v^2 = 1
    abs_mean_unit,  // (1/N) sum |v| = 1
    raw,
};

char const* to_string(NormalizationMode m);
NormalizationMode parse_normalization(std::string const& s);

/// Rescale so that the chosen moment equals one. Throws AllZeroInput when
/// that moment vanishes, std::invalid_argument on empty input.
std::vector<double> normalize(std::span<double const> values, NormalizationMode mode);

/*!
 * Binned density on the grid origin + m * bin_width.
 *
 * Only the occupied range is stored: counts[0] is bin index `first_bin`.
 * Bins are half-open, [origin + m w, origin + (m + 1) w).
 */
struct DensitySeries
{
    double bin_width = 0;
    double origin = 0;
    std::int64_t first_bin = 0;
    std::vector<std::int64_t> counts;
    std::int64_t total = 0;
    NormalizationMode normalization_mode = NormalizationMode::raw;
    std::string tag;

    std::int64_t count_at(std::int64_t bin) const;
    double density_at(std::int64_t bin) const;  // count / (total * width)
    double bin_center(std::int64_t bin) const { return origin + (static_cast<double>(bin) + 0.5) * bin_width; }
    std::int64_t last_bin() const { return first_bin + static_cast<std::int64_t>(counts.size()) - 1; }
};

DensitySeries histogram(std::span<double const> values,
                        double bin_width,
                        NormalizationMode mode = NormalizationMode::raw,
                        std::string tag = {},
                        double origin = 0);

/// Sum over bins of squared pdf differences. Series on different grids are
/// merged onto the coarser one when its width is an integer multiple of the
/// finer width and the origins align; IncompatibleBinning otherwise.
double convergence_S(DensitySeries const& a, DensitySeries const& b);

/// Coarsen onto bins `factor` times wider, keeping the origin.
DensitySeries rebin(DensitySeries const& d, int factor);

struct ScalingFit
{
    double A = 0;
    double B = 0;
    double beta = 0;
    double sse = 0;
    double lambda_infinity = 0;  // exp(B)
};

/// Least squares for log L = A N^-beta + B: beta scanned on [0.05, 2] and
/// refined by golden section, (A, B) by linear regression at fixed beta.
ScalingFit fit_scaling(std::span<std::pair<double, double> const> size_and_lambda);

struct TailFit
{
    double alpha = 0;
    double slope = 0;  // == -alpha
    std::pair<double, double> fit_window{0.9, 0.999};
    double r_squared = 0;
    std::size_t points = 0;
};

/// Straight-line fit of log(complementary CDF) against log(v) for the
/// positive samples whose quantile lies inside `window`.
TailFit fit_tail(std::span<double const> values, std::pair<double, double> window = {0.9, 0.999});

/// Points (v, P(V > v)) of the positive-side empirical complementary CDF,
/// thinned to at most `max_points` on a log-spaced grid of ranks.
std::vector<std::pair<double, double>> positive_ccdf(std::span<double const> values, std::size_t max_points = 200);

/// Per-degree densities on a shared grid; every series spans the same bins.
std::map<int, DensitySeries> decompose_by_degree(std::span<double const> values,
                                                 std::span<int const> degrees,
                                                 double bin_width,
                                                 NormalizationMode mode = NormalizationMode::raw,
                                                 double origin = 0);

/// Normalization used for eigenvector densities in reproduction recipes:
/// for two-degree networks abs_mean_unit below delta 0.7 and variance_unit
/// from there on; otherwise abs_mean_unit whenever the fitted tail exponent
/// is below 2.
NormalizationMode choose_normalization(bool two_point_spec, double delta, std::optional<double> tail_alpha);

//---------------------------------------------------------------------------//
// Output
//---------------------------------------------------------------------------//
/// CSV `bin_center,density,count,tag`. With `log_density` the density column
/// holds log(pdf) and is left empty for empty bins.
void write_density_csv(std::ostream& os, DensitySeries const& d, bool log_density = false, bool header = true);
std::string to_json(ScalingFit const& f);
std::string to_json(TailFit const& f);

}  // namespace speccav
