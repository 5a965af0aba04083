#pragma once

#include "oracle/dense_eigen.hpp"
#include "speccav/graph.hpp"

inline oracle::Matrix dense_matrix(speccav::GraphInstance const& g)
{
    oracle::Matrix m(g.size(), std::vector<double>(g.size(), 0.0));
    for (auto const& e : g.edges())
        m[e.i][e.j] = m[e.j][e.i] = e.coupling;
    return m;
}

inline oracle::Matrix dense_matrix(speccav::LaplacianView const& l)
{
    oracle::Matrix m(l.size(), std::vector<double>(l.size(), 0.0));
    for (auto const& e : l.base().edges())
        m[e.i][e.j] = m[e.j][e.i] = -e.coupling;
    for (std::size_t i = 0; i < l.size(); ++i)
        m[i][i] = l.diagonal()[i];
    return m;
}
