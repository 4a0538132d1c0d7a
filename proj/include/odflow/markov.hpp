#ifndef odflow_markov_hpp
#define odflow_markov_hpp

#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "odflow/flows.hpp"
#include "odflow/graph.hpp"
#include "odflow/matrix.hpp"

namespace odflow {

enum class GapPolicy { self_loop, uniform, fail };

// Which per-edge cost accompanies the transition probabilities: trip
// distance (km) or trip duration (minutes). The first-passage recursion is
// identical either way.
enum class CostKind { distance, duration };

inline constexpr double kMissingCost = std::numeric_limits<double>::quiet_NaN();

// Per-step column-stochastic transition operator. Row = destination,
// column = origin. Sparse by column; cost is NaN where the source data
// carried no usable statistic (imputed later by the baseline model).
struct StepOperator {
    int t = 0;
    int n = 0;

    struct Entry {
        int row = 0;
        double prob = 0.0;
        double cost = 0.0;
    };
    std::vector<std::vector<Entry>> cols;  // rows ascending within a column

    std::size_t nnz() const;
    // Probability of the (dest=row, origin=col) transition, 0 when absent.
    double prob(int row, int col) const;
    const Entry* entry(int row, int col) const;
    // max |colsum - 1|
    double stochasticity_drift() const;
    Matrix dense() const;
};

// Cumulative product A^t = M^t ... M^1 with its window metadata. Stored
// sparse per column until fill-in exceeds 25% of N^2, then dense.
class ElapsedOperator {
public:
    explicit ElapsedOperator(int n);  // A^0 = I

    int n() const { return n_; }
    int steps() const { return steps_; }
    double at(int row, int col) const;
    // max column-sum drift observed before renormalization, over all multiplies
    double max_drift() const { return max_drift_; }

    // Left-multiplies by the next step operator; renormalizes columns when
    // drift exceeds 1e-10 and records the drift.
    void apply(const StepOperator& op);

    Matrix dense() const;

private:
    void densify();

    int n_ = 0;
    int steps_ = 0;
    bool is_dense_ = false;
    std::vector<std::vector<StepOperator::Entry>> sparse_cols_;
    std::size_t nnz_ = 0;
    Matrix dense_;
    double max_drift_ = 0.0;
};

// A^t over consecutive step operators; empty list yields the identity A^0
// of dimension n.
ElapsedOperator elapse(const std::vector<StepOperator>& ops, int n);
ElapsedOperator elapse(const std::vector<StepOperator>& ops);  // requires non-empty

// Normalizes one slice's counts into a column-stochastic operator over the
// component's cells. Zero-outflow columns are handled per gap_policy;
// costs are filled from the median statistic with mean fallback.
StepOperator build_step_operator(const FlowSlice& slice, const ComponentSpec& component,
                                 GapPolicy gap_policy = GapPolicy::self_loop,
                                 CostKind cost_kind = CostKind::distance);

std::vector<StepOperator> build_step_operators(const std::vector<FlowSlice>& slices,
                                               const ComponentSpec& component,
                                               GapPolicy gap_policy = GapPolicy::self_loop,
                                               CostKind cost_kind = CostKind::distance);

// --- experimental approximate stochastic p-th root -------------------------

enum class RootMetric { frobenius, kl };

struct RootOptions {
    int max_iter = 10000;
    double tol = 1e-8;  // target residual; reaching it sets the converged flag
    RootMetric metric = RootMetric::frobenius;
};

struct RootResult {
    Matrix root;          // column-stochastic H
    double residual = 0;  // metric(M, H^p) at termination
    int iterations = 0;
    bool converged = false;
    // Always true: the whole operation is an experimental device for
    // mobility-aliasing compensation, not a calibrated method.
    bool experimental = true;
};

// Projected first-order descent for H minimizing metric(M, H^p), columns
// projected onto the probability simplex after each step. Initialized at
// (1 - 1/p) I + (1/p) M.
RootResult approximate_stochastic_root(const Matrix& M, int p,
                                       const RootOptions& opts = {});

// Euclidean projection of v onto the probability simplex.
void project_to_simplex(std::vector<double>& v);

// --- exports ---------------------------------------------------------------

// CSV triplets `row_cell,col_cell,value` for the nonzero probabilities.
void write_operator_csv(std::ostream& out, const StepOperator& op,
                        const ComponentSpec& component);

}  // namespace odflow

#endif
