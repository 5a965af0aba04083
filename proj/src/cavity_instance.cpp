#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "speccav/cavity.hpp"
#include "speccav/errors.hpp"
#include "speccav/format.hpp"

namespace speccav {

InstanceMessages::InstanceMessages(GraphInstance const& g, double lambda, Rng& rng) : lambda_(lambda)
{
    build(g, +1, std::vector<double>(g.size(), 0.0), MatrixVariant::adjacency);
    init(nullptr, rng);
}

InstanceMessages::InstanceMessages(GraphInstance const& g, double lambda, CavityMessage init_msg, Rng& rng)
    : lambda_(lambda)
{
    build(g, +1, std::vector<double>(g.size(), 0.0), MatrixVariant::adjacency);
    init(&init_msg, rng);
}

InstanceMessages::InstanceMessages(LaplacianView const& l, double lambda, Rng& rng) : lambda_(lambda)
{
    build(l.base(), -1, std::vector<double>(l.diagonal().begin(), l.diagonal().end()), MatrixVariant::laplacian);
    init(nullptr, rng);
}

InstanceMessages::InstanceMessages(LaplacianView const& l, double lambda, CavityMessage init_msg, Rng& rng)
    : lambda_(lambda)
{
    build(l.base(), -1, std::vector<double>(l.diagonal().begin(), l.diagonal().end()), MatrixVariant::laplacian);
    init(&init_msg, rng);
}

void InstanceMessages::build(GraphInstance const& g, int off_sign, std::vector<double> diagonal, MatrixVariant variant)
{
    variant_ = variant;
    diagonal_ = std::move(diagonal);
    std::size_t n = g.size();
    std::size_t m = 2 * g.edges().size();
    source_.resize(m);
    coupling_.resize(m);
    in_ptr_.assign(n + 1, 0);
    for (std::size_t e = 0; e < g.edges().size(); ++e)
    {
        auto const& ed = g.edges()[e];
        source_[2 * e] = ed.i;
        source_[2 * e + 1] = ed.j;
        coupling_[2 * e] = coupling_[2 * e + 1] = off_sign * ed.coupling;
        ++in_ptr_[ed.j + 1];
        ++in_ptr_[ed.i + 1];
    }
    std::partial_sum(in_ptr_.begin(), in_ptr_.end(), in_ptr_.begin());
    in_edges_.resize(m);
    std::vector<std::size_t> fill(in_ptr_.begin(), in_ptr_.end() - 1);
    for (std::size_t d = 0; d < m; ++d)
        in_edges_[fill[target(d)]++] = static_cast<std::uint32_t>(d);
    node_A_.assign(n, 0.0);
    node_H_.assign(n, 0.0);
}

void InstanceMessages::init(CavityMessage const* fixed, Rng& rng)
{
    std::size_t m = source_.size();
    order_.resize(m);
    std::iota(order_.begin(), order_.end(), 0U);
    for (std::size_t i = m; i > 1; --i)
        std::swap(order_[i - 1], order_[rng.below(i)]);

    messages_.resize(m);
    for (auto& msg : messages_)
    {
        if (fixed)
            msg = *fixed;
        else
            msg = {rng.uniform(lambda_ / 2, lambda_), rng.uniform(-1.0, 1.0)};
    }
    update_marginals();
}

CavityMessage InstanceMessages::compute(std::size_t d) const
{
    // message i -> l collects every incoming j -> i except l -> i
    std::uint32_t i = source_[d];
    std::size_t skip = d ^ 1;
    double a = lambda_ - diagonal_[i];
    double h = 0;
    for (std::size_t p = in_ptr_[i]; p < in_ptr_[i + 1]; ++p)
    {
        std::uint32_t in = in_edges_[p];
        if (in == skip)
            continue;
        auto const& msg = messages_[in];
        double c = coupling_[in];
        a -= c * c / msg.A;
        h += c * msg.H / msg.A;
    }
    return {a, h};
}

void InstanceMessages::update_marginals()
{
    for (std::size_t i = 0; i < diagonal_.size(); ++i)
    {
        double a = lambda_ - diagonal_[i];
        double h = 0;
        for (std::size_t p = in_ptr_[i]; p < in_ptr_[i + 1]; ++p)
        {
            auto const& msg = messages_[in_edges_[p]];
            double c = coupling_[in_edges_[p]];
            a -= c * c / msg.A;
            h += c * msg.H / msg.A;
        }
        node_A_[i] = a;
        node_H_[i] = h;
    }
}

std::vector<double> InstanceMessages::eigenvector_estimate() const
{
    std::vector<double> v(node_A_.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = node_H_[i] / node_A_[i];
    return v;
}

double instance_sweep(InstanceMessages& msgs)
{
    auto previous = msgs.messages_;
    double old_mean = 0;
    for (auto const& m : previous)
        old_mean += std::abs(m.H);

    for (auto d : msgs.order_)
    {
        auto updated = msgs.compute(d);
        if (!(std::abs(updated.A) >= kAFloor))
            throw DivergedMessage("cavity message |A| fell below the floor at lambda="
                                  + format_shortest(msgs.lambda_) + "; lambda is below the edge");
        msgs.messages_[d] = updated;
    }

    double new_mean = 0;
    for (auto const& m : msgs.messages_)
        new_mean += std::abs(m.H);
    msgs.h_growth_ = old_mean > 0 ? new_mean / old_mean : 0.0;
    if (new_mean > 0)
    {
        double scale = static_cast<double>(msgs.messages_.size()) / new_mean;
        for (auto& m : msgs.messages_)
            m.H *= scale;
    }

    double max_change = 0;
    for (std::size_t d = 0; d < previous.size(); ++d)
    {
        max_change = std::max(max_change, std::abs(msgs.messages_[d].A - previous[d].A));
        max_change = std::max(max_change, std::abs(msgs.messages_[d].H - previous[d].H));
    }
    ++msgs.sweeps_;
    msgs.update_marginals();
    return max_change;
}

long converge_instance(InstanceMessages& msgs, double tol, long max_sweeps)
{
    for (long s = 1; s <= max_sweeps; ++s)
    {
        if (instance_sweep(msgs) < tol)
            return s;
    }
    throw NoConvergence("cavity messages did not settle within " + std::to_string(max_sweeps) + " sweeps");
}

}  // namespace speccav
