#pragma once

#include <string>
#include <vector>

#include "speccav/rng.hpp"

namespace speccav {

enum class DegreeKind
{
    two_point,
    truncated_poisson,
    regular,
};

/*!
 * Degree distribution p(k) with bounded support 0 <= k <= k_max.
 *
 * Three families are supported: two degrees with a given mixing ratio, a
 * Poisson law truncated at k_max and renormalized, and the degenerate
 * k-regular case. The probability table is computed once at construction.
 */
class DegreeSpec
{
  public:
    static DegreeSpec two_point(int k_small, int k_large, double ratio_small);
    static DegreeSpec truncated_poisson(double rate, int k_max);
    static DegreeSpec regular(int k);

    /// Parse the `kind:params` mini-language, e.g. `two_point:4,8,0.9`,
    /// `tpoisson:4,8` or `regular:4`. Throws std::invalid_argument.
    static DegreeSpec parse(std::string const& text);

    DegreeKind kind() const { return kind_; }
    int k_max() const { return k_max_; }

    int k_small() const { return k_small_; }
    int k_large() const { return k_large_; }
    double ratio_small() const { return ratio_small_; }
    double rate() const { return rate_; }

    /// p(k); zero outside [0, k_max].
    double pk(int k) const;
    std::vector<double> const& pmf() const { return pmf_; }

    /// Normalization constant of the truncated Poisson law (1 otherwise).
    double normalizer() const { return normalizer_; }

    double mean() const;

    /// Canonical mini-language form; parse(to_string()) round-trips.
    std::string to_string() const;

  private:
    DegreeSpec() = default;

    DegreeKind kind_ = DegreeKind::regular;
    int k_max_ = 0;
    int k_small_ = 0;
    int k_large_ = 0;
    double ratio_small_ = 1;
    double rate_ = 0;
    double normalizer_ = 1;
    std::vector<double> pmf_;
};

/// Edge-end degree law r(k) = k p(k) / sum_k k p(k). Throws
/// std::invalid_argument when the mean degree is zero.
std::vector<double> edge_degree_posterior(DegreeSpec const& spec);

/// Sampler over a finite table of non-negative weights indexed from 0.
class DiscreteSampler
{
  public:
    explicit DiscreteSampler(std::vector<double> const& weights);

    int operator()(Rng& rng) const;

  private:
    std::vector<int> values_;
    std::vector<double> cumulative_;
};

}  // namespace speccav
