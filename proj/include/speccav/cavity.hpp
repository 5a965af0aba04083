#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "speccav/degree_spec.hpp"
#include "speccav/graph.hpp"
#include "speccav/power.hpp"
#include "speccav/rng.hpp"

namespace speccav {

/// Entries with |A| below this are treated as divergence.
inline constexpr double kAFloor = 1e-12;

/// Coefficients of the local quadratic A w^2 - 2 H w.
struct CavityMessage
{
    double A = 0;
    double H = 0;
};

//---------------------------------------------------------------------------//
// Message passing on one concrete instance
//---------------------------------------------------------------------------//

/*!
 * Directed cavity messages (i -> l) on a fixed instance, plus node marginals.
 *
 * Directed edge 2e is (edges[e].i -> edges[e].j) and 2e + 1 the reverse. The
 * sweep order is a random permutation fixed at construction. H is rescaled to
 * mean |H| = 1 after every sweep; the factor is kept in `h_growth`.
 */
class InstanceMessages
{
  public:
    InstanceMessages(GraphInstance const& g, double lambda, Rng& rng);
    InstanceMessages(GraphInstance const& g, double lambda, CavityMessage init, Rng& rng);
    InstanceMessages(LaplacianView const& l, double lambda, Rng& rng);
    InstanceMessages(LaplacianView const& l, double lambda, CavityMessage init, Rng& rng);

    double lambda() const { return lambda_; }
    MatrixVariant variant() const { return variant_; }
    std::size_t num_nodes() const { return diagonal_.size(); }
    std::size_t num_messages() const { return messages_.size(); }

    std::vector<CavityMessage> const& messages() const { return messages_; }
    CavityMessage const& message(std::size_t directed_edge) const { return messages_[directed_edge]; }
    std::uint32_t source(std::size_t directed_edge) const { return source_[directed_edge]; }
    std::uint32_t target(std::size_t directed_edge) const { return source_[directed_edge ^ 1]; }

    std::vector<double> const& node_A() const { return node_A_; }
    std::vector<double> const& node_H() const { return node_H_; }
    double h_growth() const { return h_growth_; }
    long sweeps() const { return sweeps_; }

    /// Recompute (A_i, H_i) from the current incoming messages.
    void update_marginals();

    /// v_i = H_i / A_i from the current node marginals.
    std::vector<double> eigenvector_estimate() const;

    friend double instance_sweep(InstanceMessages& msgs);

  private:
    void build(GraphInstance const& g, int off_sign, std::vector<double> diagonal, MatrixVariant variant);
    void init(CavityMessage const* fixed, Rng& rng);
    CavityMessage compute(std::size_t directed_edge) const;

    double lambda_;
    MatrixVariant variant_ = MatrixVariant::adjacency;
    std::vector<double> diagonal_;           // J^(L)_ii, zero for adjacency
    std::vector<std::uint32_t> source_;      // per directed edge
    std::vector<double> coupling_;           // per directed edge, Laplacian sign applied
    std::vector<std::size_t> in_ptr_;        // CSR of incoming directed edges per node
    std::vector<std::uint32_t> in_edges_;
    std::vector<std::uint32_t> order_;
    std::vector<CavityMessage> messages_;
    std::vector<double> node_A_;
    std::vector<double> node_H_;
    double h_growth_ = 1;
    long sweeps_ = 0;
};

/// One sequential sweep over every directed message. Returns the largest
/// absolute change of any A or (renormalized) H. Throws DivergedMessage when
/// an updated |A| drops below kAFloor.
double instance_sweep(InstanceMessages& msgs);

/// Sweep until the largest change is below `tol`; returns the sweep count.
/// Throws NoConvergence after `max_sweeps`.
long converge_instance(InstanceMessages& msgs, double tol = 1e-10, long max_sweeps = 100000);

//---------------------------------------------------------------------------//
// Population dynamics over q(A, H)
//---------------------------------------------------------------------------//

enum class UpdateStrategy
{
    sequential,
    parallel,
};

/// Ensemble-level setting shared by every population at any trial lambda.
struct PopulationTemplate
{
    DegreeSpec spec;
    double delta = 0;
    MatrixVariant variant = MatrixVariant::adjacency;
};

/*!
 * Finite pool of (A, H) pairs representing the cavity-field density q(A, H).
 *
 * The pool size never changes. `h_growth` is the factor by which mean |H|
 * grew during the last sweep (before renormalization).
 */
class CavityPopulation
{
  public:
    /// A ~ U(lambda/2, lambda), H ~ U(-1, 1).
    CavityPopulation(PopulationTemplate tmpl, double lambda, std::size_t n_pop, Rng& rng);
    /// Explicit pairs, e.g. loaded from a snapshot.
    CavityPopulation(PopulationTemplate tmpl, double lambda, std::vector<double> A, std::vector<double> H);

    PopulationTemplate const& setting() const { return tmpl_; }
    DegreeSpec const& spec() const { return tmpl_.spec; }
    double delta() const { return tmpl_.delta; }
    MatrixVariant variant() const { return tmpl_.variant; }

    double lambda() const { return lambda_; }
    void set_lambda(double lambda) { lambda_ = lambda; }
    std::size_t size() const { return A_.size(); }
    long sweep() const { return sweep_; }
    double h_growth() const { return h_growth_; }

    std::vector<double> const& A() const { return A_; }
    std::vector<double> const& H() const { return H_; }
    std::vector<double>& mutable_H() { return H_; }

    /// Flip every H so that the population mean of H is non-negative.
    void orient();

    friend void population_sweep_sequential(CavityPopulation&, Rng&, bool);
    friend void population_sweep_parallel(CavityPopulation&, Rng&, bool);

  private:
    PopulationTemplate tmpl_;
    double lambda_;
    std::vector<double> A_;
    std::vector<double> H_;
    long sweep_ = 0;
    double h_growth_ = 1;
};

/// In-place sweep: entry m is rebuilt from k - 1 uniformly chosen members of
/// the current pool (entries before m already updated), k ~ r(k). Throws
/// DivergedPopulation when a new |A| drops below kAFloor.
void population_sweep_sequential(CavityPopulation& pop, Rng& rng, bool renormalize = true);

/// Every new entry is built from the pool as it was before the sweep.
void population_sweep_parallel(CavityPopulation& pop, Rng& rng, bool renormalize = true);

struct MarginalSamples
{
    std::vector<double> A;
    std::vector<double> H;
    std::vector<double> v;  // H / A
    std::vector<int> degree;
    std::size_t rejected = 0;  // draws with A <= kAFloor
};

/// Node-level fields: k ~ p(k), k pool members, per-node couplings. Rejected
/// draws do not count towards `count`.
MarginalSamples sample_marginals(CavityPopulation const& pop, std::size_t count, Rng& rng);

/// T = mean (H/A)^2 and U = mean |H/A| over marginal samples.
double statistic_T(MarginalSamples const& s);
double statistic_U(MarginalSamples const& s);

//---------------------------------------------------------------------------//
// Lambda search
//---------------------------------------------------------------------------//

enum class LambdaCriterion
{
    growth_rate,
    T_unit,
    U_unit,
};

char const* to_string(LambdaCriterion c);
LambdaCriterion parse_criterion(std::string const& s);

/// U is required when the v-density tail exponent is below 2.
LambdaCriterion select_unit_criterion(double tail_alpha);

struct PopulationOptions
{
    std::size_t n_pop = 100000;
    int burn_in = 200;
    int measure = 300;
    double tol_lambda = 1e-3;
    UpdateStrategy strategy = UpdateStrategy::sequential;
    std::size_t marginal_samples = 0;  // 0: same as n_pop
    int max_trials = 80;
    // trials closer than this (or 10 tol_lambda) are not checked for
    // monotonicity; the statistic is bistable in a narrow band at the edge
    double monotone_margin = 0.05;
};

struct TrialRecord
{
    double lambda = 0;
    double h_growth = 0;  // mean over measurement sweeps
    double T = 0;         // on the un-renormalized H scale
    double U = 0;
    bool diverged = false;

    double log_T = 0;
    double log_U = 0;
};

/// Run one trial lambda from a fresh population: burn-in then measurement
/// sweeps. Divergence is reported through `diverged`, not thrown.
TrialRecord evaluate_trial(PopulationTemplate const& tmpl,
                           double lambda,
                           PopulationOptions const& opts,
                           std::uint64_t seed,
                           std::optional<CavityPopulation>* keep = nullptr);

struct LambdaSearchResult
{
    double lambda_hat = 0;
    LambdaCriterion criterion = LambdaCriterion::growth_rate;
    bool edge_limited = false;  // the root sat at the divergence threshold
    std::vector<TrialRecord> trials;
    std::optional<CavityPopulation> population;  // stationary pool at lambda_hat
};

/*!
 * Locate the cavity estimate of the first eigenvalue inside [lo, hi].
 *
 * The window must bracket the edge: `hi` stable with the criterion's score
 * below one, `lo` diverged or above one (EdgeNotBracketed otherwise). The
 * bracket is bisected to `tol_lambda` and the root interpolated on the log of
 * the statistic. Every trial reuses the same random stream.
 */
LambdaSearchResult find_lambda(PopulationTemplate const& tmpl,
                               double lo,
                               double hi,
                               LambdaCriterion criterion,
                               PopulationOptions const& opts,
                               std::uint64_t seed);

//---------------------------------------------------------------------------//
// Text formats
//---------------------------------------------------------------------------//
void write_population(std::ostream& os, CavityPopulation const& pop);
/// Reads a snapshot written by write_population; the template must match
/// the header's variant.
CavityPopulation read_population(std::istream& is, PopulationTemplate tmpl);
void write_trials_csv(std::ostream& os, std::vector<TrialRecord> const& trials);

}  // namespace speccav
