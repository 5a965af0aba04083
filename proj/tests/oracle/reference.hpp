#pragma once

// Closed-form references used by the statistical tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

/// sum_{k=0}^{k_max} rate^k e^-rate / k!
inline double poisson_partial_sum(double rate, int k_max)
{
    double term = std::exp(-rate), sum = 0;
    for (int k = 0; k <= k_max; ++k)
    {
        sum += term;
        term *= rate / (k + 1);
    }
    return sum;
}

inline double poisson_pmf(double rate, int k)
{
    return std::exp(k * std::log(rate) - rate - std::lgamma(k + 1.0));
}

inline double normal_cdf(double x)
{
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

/// Pareto samples with P(X > x) = x^-alpha for x >= 1, by inversion.
inline std::vector<double> pareto_samples(double alpha, std::size_t count, std::uint64_t seed)
{
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> out(count);
    for (auto& x : out)
        x = std::pow(1.0 - u(gen), -1.0 / alpha);
    return out;
}

inline std::vector<double> normal_samples(std::size_t count, std::uint64_t seed)
{
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> d;
    std::vector<double> out(count);
    for (auto& x : out)
        x = d(gen);
    return out;
}

/// Largest root of A^2 - lambda A + (k - 1) = 0, the regular-graph cavity field.
inline double regular_cavity_A(double lambda, int k)
{
    return (lambda + std::sqrt(lambda * lambda - 4.0 * (k - 1))) / 2;
}

}  // namespace oracle
