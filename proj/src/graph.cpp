#include "speccav/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "speccav/errors.hpp"
#include "speccav/format.hpp"

namespace speccav {

GraphInstance::GraphInstance(std::size_t n, std::vector<Edge> edges, double delta, std::uint64_t seed)
    : degrees_(n, 0), edges_(std::move(edges)), delta_(delta), seed_(seed)
{
    if (!(delta >= 0 && delta <= 1))
        throw std::invalid_argument("delta must lie in [0, 1]");
    std::sort(edges_.begin(), edges_.end(), [](Edge const& a, Edge const& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    for (std::size_t e = 0; e < edges_.size(); ++e)
    {
        auto const& ed = edges_[e];
        if (ed.i >= ed.j)
            throw std::invalid_argument("edges must satisfy i < j (no self-loops)");
        if (ed.j >= n)
            throw std::invalid_argument("edge endpoint out of range");
        if (ed.coupling != 1 && ed.coupling != -1)
            throw std::invalid_argument("coupling must be +1 or -1");
        if (e > 0 && edges_[e - 1].i == ed.i && edges_[e - 1].j == ed.j)
            throw std::invalid_argument("duplicate edge");
        ++degrees_[ed.i];
        ++degrees_[ed.j];
    }
}

int GraphInstance::max_degree() const
{
    return degrees_.empty() ? 0 : *std::max_element(degrees_.begin(), degrees_.end());
}

LaplacianView::LaplacianView(GraphInstance base) : base_(std::move(base)), diagonal_(base_.size(), 0)
{
    if (base_.delta() != 1.0)
        throw std::invalid_argument("the Laplacian view is only defined for delta = 1");
    for (auto const& e : base_.edges())
    {
        diagonal_[e.i] += e.coupling;
        diagonal_[e.j] += e.coupling;
    }
}

double eval_pk(DegreeSpec const& spec, int k)
{
    return spec.pk(k);
}

std::vector<int> sample_degree_sequence(DegreeSpec const& spec, std::size_t n, Rng& rng)
{
    if (n < 2)
        throw std::invalid_argument("degree sequence needs n >= 2");
    bool has_edge_degree = false;
    for (int k = 1; k <= spec.k_max(); ++k)
        has_edge_degree = has_edge_degree || spec.pk(k) > 0;
    if (!has_edge_degree)
        throw std::invalid_argument("degree distribution has no mass on k >= 1");

    DiscreteSampler draw(spec.pmf());
    std::vector<int> degrees(n);
    long total = 0;
    for (auto& d : degrees)
    {
        d = draw(rng);
        total += d;
    }
    if (total % 2 != 0)
    {
        long rest = total - degrees.back();
        bool fixable = false;
        for (int k = 0; k <= spec.k_max(); ++k)
            fixable = fixable || (spec.pk(k) > 0 && (rest + k) % 2 == 0);
        // e.g. regular(3) with odd n: no redraw can repair the parity
        if (!fixable)
            throw std::invalid_argument("no even-sum degree sequence exists for this n");
        do
        {
            degrees.back() = draw(rng);
        } while ((rest + degrees.back()) % 2 != 0);
    }
    return degrees;
}

namespace {

class StubPairing
{
  public:
    explicit StubPairing(std::vector<int> const& degrees) : degrees_(degrees), adjacency_(degrees.size())
    {
        for (std::size_t i = 0; i < degrees.size(); ++i)
            adjacency_[i].reserve(static_cast<std::size_t>(degrees[i]));
    }

    // One pass of steps (S) and (A). Returns true when every stub was paired.
    bool attempt(Rng& rng, std::vector<Link>& links)
    {
        links.clear();
        for (auto& a : adjacency_)
            a.clear();
        stubs_.clear();
        for (std::size_t i = 0; i < degrees_.size(); ++i)
            stubs_.insert(stubs_.end(), static_cast<std::size_t>(degrees_[i]), static_cast<std::uint32_t>(i));

        int rejections = 0;
        while (stubs_.size() >= 2)
        {
            std::size_t m = stubs_.size();
            std::size_t p = rng.below(m);
            std::size_t q = rng.below(m - 1);
            if (q >= p)
                ++q;
            std::uint32_t a = stubs_[p];
            std::uint32_t b = stubs_[q];
            if (a != b && !adjacent(a, b))
            {
                adjacency_[a].push_back(b);
                adjacency_[b].push_back(a);
                links.push_back({std::min(a, b), std::max(a, b)});
                remove_position(std::max(p, q));
                remove_position(std::min(p, q));
                rejections = 0;
                continue;
            }
            // rejected pair goes back to U untouched
            if (++rejections >= kCheckAfter)
            {
                if (dead_end())
                    return false;
                rejections = 0;
            }
        }
        return stubs_.empty();
    }

  private:
    static constexpr int kCheckAfter = 32;

    bool adjacent(std::uint32_t a, std::uint32_t b) const
    {
        auto const& adj = adjacency_[a];
        return std::find(adj.begin(), adj.end(), b) != adj.end();
    }

    void remove_position(std::size_t p)
    {
        stubs_[p] = stubs_.back();
        stubs_.pop_back();
    }

    // Exact: true when every unordered pair left in U is a self-pair or an
    // existing edge.
    bool dead_end() const
    {
        std::vector<std::uint32_t> nodes(stubs_.begin(), stubs_.end());
        std::sort(nodes.begin(), nodes.end());
        nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
        for (std::size_t x = 0; x < nodes.size(); ++x)
            for (std::size_t y = x + 1; y < nodes.size(); ++y)
                if (!adjacent(nodes[x], nodes[y]))
                    return false;
        return true;
    }

    std::vector<int> const& degrees_;
    std::vector<std::vector<std::uint32_t>> adjacency_;
    std::vector<std::uint32_t> stubs_;
};

}  // namespace

std::vector<Link> wire_configuration_model(std::vector<int> const& degrees, Rng& rng, int max_restarts)
{
    if (max_restarts < 1)
        throw std::invalid_argument("max_restarts must be >= 1");
    long total = 0;
    for (int d : degrees)
    {
        if (d < 0)
            throw std::invalid_argument("negative degree");
        total += d;
    }
    if (total % 2 != 0)
        throw std::invalid_argument("degree sum must be even");

    StubPairing pairing(degrees);
    std::vector<Link> links;
    links.reserve(static_cast<std::size_t>(total / 2));
    for (int restart = 0; restart <= max_restarts; ++restart)
    {
        if (pairing.attempt(rng, links))
        {
            std::sort(links.begin(), links.end(), [](Link const& a, Link const& b) {
                return a.i != b.i ? a.i < b.i : a.j < b.j;
            });
            return links;
        }
    }
    throw RestartLimitExceeded("configuration-model wiring hit a dead end " + std::to_string(max_restarts + 1)
                               + " times");
}

std::vector<Edge> assign_couplings(std::vector<Link> const& links, double delta, Rng& rng)
{
    if (!(delta >= 0 && delta <= 1))
        throw std::invalid_argument("delta must lie in [0, 1]");
    double p_plus = (1 + delta) / 2;
    std::vector<Edge> edges;
    edges.reserve(links.size());
    for (auto const& l : links)
        edges.push_back({l.i, l.j, rng.bernoulli(p_plus) ? 1 : -1});
    return edges;
}

LaplacianView build_laplacian(GraphInstance const& g)
{
    return LaplacianView(g);
}

GraphInstance generate_graph(DegreeSpec const& spec, std::size_t n, double delta, std::uint64_t seed, int max_restarts)
{
    Rng rng(seed);
    auto degrees = sample_degree_sequence(spec, n, rng);
    auto links = wire_configuration_model(degrees, rng, max_restarts);
    auto edges = assign_couplings(links, delta, rng);
    return GraphInstance(n, std::move(edges), delta, seed);
}

void write_graph(std::ostream& os, GraphInstance const& g)
{
    os << "n=" << g.size() << " delta=" << format_shortest(g.delta()) << " seed=" << g.seed() << '\n';
    for (auto const& e : g.edges())
        os << e.i << ' ' << e.j << ' ' << e.coupling << '\n';
}

std::string graph_to_string(GraphInstance const& g)
{
    std::ostringstream os;
    write_graph(os, g);
    return os.str();
}

GraphInstance read_graph(std::istream& is)
{
    std::string header;
    if (!std::getline(is, header))
        throw std::invalid_argument("graph file is empty");

    std::size_t n = 0;
    double delta = 0;
    std::uint64_t seed = 0;
    bool have_n = false, have_delta = false, have_seed = false;
    std::istringstream hs(header);
    std::string token;
    while (hs >> token)
    {
        auto eq = token.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("malformed graph header token '" + token + "'");
        auto key = token.substr(0, eq);
        auto value = token.substr(eq + 1);
        if (key == "n")
        {
            n = std::stoull(value);
            have_n = true;
        }
        else if (key == "delta")
        {
            delta = std::stod(value);
            have_delta = true;
        }
        else if (key == "seed")
        {
            seed = std::stoull(value);
            have_seed = true;
        }
        else
        {
            throw std::invalid_argument("unknown graph header key '" + key + "'");
        }
    }
    if (!have_n || !have_delta || !have_seed)
        throw std::invalid_argument("graph header must carry n, delta and seed");

    std::vector<Edge> edges;
    std::string line;
    std::size_t lineno = 1;
    while (std::getline(is, line))
    {
        ++lineno;
        if (line.empty())
            continue;
        std::istringstream ls(line);
        long long i, j;
        int coupling;
        std::string extra;
        if (!(ls >> i >> j >> coupling) || (ls >> extra) || i < 0 || j < 0)
            throw std::invalid_argument("malformed edge on line " + std::to_string(lineno));
        edges.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), coupling});
    }
    return GraphInstance(n, std::move(edges), delta, seed);
}

GraphInstance load_graph(std::string const& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open graph file '" + path + "'");
    return read_graph(in);
}

void save_graph(std::string const& path, GraphInstance const& g)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write graph file '" + path + "'");
    write_graph(out, g);
}

}  // namespace speccav
