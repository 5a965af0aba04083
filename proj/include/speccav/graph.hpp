#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "speccav/degree_spec.hpp"
#include "speccav/rng.hpp"

namespace speccav {

struct Edge
{
    std::uint32_t i = 0;
    std::uint32_t j = 0;
    int coupling = 1;  // +1 or -1

    friend bool operator==(Edge const&, Edge const&) = default;
};

/// Unsigned edge produced by the pairing step, before couplings are drawn.
struct Link
{
    std::uint32_t i = 0;
    std::uint32_t j = 0;

    friend bool operator==(Link const&, Link const&) = default;
};

/*!
 * Symmetric sparse matrix J with +/-1 off-diagonal entries and zero diagonal.
 *
 * Edges are stored once with i < j in lexicographic order. The constructor
 * validates that the edge list is simple and consistent with `degrees`;
 * instances are immutable afterwards.
 */
class GraphInstance
{
  public:
    GraphInstance(std::size_t n, std::vector<Edge> edges, double delta, std::uint64_t seed);

    std::size_t size() const { return degrees_.size(); }
    std::vector<int> const& degrees() const { return degrees_; }
    std::vector<Edge> const& edges() const { return edges_; }
    double delta() const { return delta_; }
    std::uint64_t seed() const { return seed_; }
    int max_degree() const;

    friend bool operator==(GraphInstance const&, GraphInstance const&) = default;

  private:
    std::vector<int> degrees_;
    std::vector<Edge> edges_;
    double delta_;
    std::uint64_t seed_;
};

/// Graph Laplacian diag(sum_j J_ij) - J of a Delta = 1 instance.
class LaplacianView
{
  public:
    explicit LaplacianView(GraphInstance base);

    GraphInstance const& base() const { return base_; }
    std::vector<int> const& diagonal() const { return diagonal_; }
    std::size_t size() const { return base_.size(); }

  private:
    GraphInstance base_;
    std::vector<int> diagonal_;
};

/// p(k) for k >= 0.
double eval_pk(DegreeSpec const& spec, int k);

/// i.i.d. degrees from p(k). When the total is odd the last node's degree is
/// redrawn until the total is even.
std::vector<int> sample_degree_sequence(DegreeSpec const& spec, std::size_t n, Rng& rng);

/// Stub-pairing construction of a simple graph with the given degrees.
/// Throws RestartLimitExceeded when `max_restarts` full restarts are spent.
std::vector<Link> wire_configuration_model(std::vector<int> const& degrees,
                                           Rng& rng,
                                           int max_restarts = 100);

/// Draw J = +1 with probability (1 + delta) / 2 independently per link.
std::vector<Edge> assign_couplings(std::vector<Link> const& links, double delta, Rng& rng);

LaplacianView build_laplacian(GraphInstance const& g);

/// Full pipeline: degrees, wiring, couplings, all from one seeded stream.
GraphInstance generate_graph(DegreeSpec const& spec,
                             std::size_t n,
                             double delta,
                             std::uint64_t seed,
                             int max_restarts = 100);

//---------------------------------------------------------------------------//
// Text serialization: header `n=<int> delta=<real> seed=<int>`, then one
// `i j J` line per edge in (i, j) order.
//---------------------------------------------------------------------------//
void write_graph(std::ostream& os, GraphInstance const& g);
std::string graph_to_string(GraphInstance const& g);
GraphInstance read_graph(std::istream& is);
GraphInstance load_graph(std::string const& path);
void save_graph(std::string const& path, GraphInstance const& g);

}  // namespace speccav
